// kmsd: run verification scenarios for KMS-symmetric Dirichlet forms at
// finite truncation.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kmsd/scenario.hpp"

namespace {

int run(const std::string& config, std::string out_dir, const std::string& format, const std::string& seed, int jobs)
{
    using kmsd::ExitCode;
    try {
        const kmsd::Scenario s = kmsd::load_scenario(config);
        kmsd::RunOptions opts;
        opts.jobs = jobs;
        if (!seed.empty()) opts.seed_override = std::stoull(seed);
        const kmsd::RunResult result = kmsd::run_scenario(s, opts);
        if (out_dir.empty()) {
            const char* env = std::getenv("KMSD_OUT_DIR");
            out_dir = env && *env ? env : ".";
        }
        for (const auto& path : kmsd::emit_results(s, result, out_dir, format)) std::cerr << "wrote " << path << '\n';
        for (const auto& r : result.reports) {
            std::cout << kmsd::to_string(r.status) << (r.expected_failure ? " (negative control)" : "") << "  "
                      << r.check_id;
            if (r.parameters.contains("t")) std::cout << " t=" << r.parameters["t"].dump();
            if (!r.note.empty()) std::cout << "  [" << r.note << "]";
            std::cout << '\n';
        }
        return static_cast<int>(result.exit_code());
    } catch (const kmsd::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Parse);
    } catch (const kmsd::SpecError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Validation);
    } catch (const kmsd::ConditioningError& e) {
        std::cerr << "conditioning error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Conditioning);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::Validation);
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verification runner for KMS-symmetric Dirichlet forms on truncated Fock space"};
    app.require_subcommand(1);

    std::string config, out_dir, format = "json", seed;
    int jobs = 1;
    auto* run_cmd = app.add_subcommand("run", "Run the checks declared in a scenario file");
    run_cmd->add_option("config", config, "Scenario JSON file")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (default: $KMSD_OUT_DIR or .)");
    run_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    run_cmd->add_option("--seed", seed, "Override the scenario seed")->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* list_cmd = app.add_subcommand("list-checks", "List known check identifiers and anchors");

    std::string check_id;
    auto* describe_cmd = app.add_subcommand("describe", "Print the anchor and description of a check");
    describe_cmd->add_option("check", check_id, "Check identifier")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(kmsd::ExitCode::Parse);
    }

    if (*run_cmd) return run(config, out_dir, format, seed, jobs);
    if (*list_cmd) {
        for (const auto& c : kmsd::check_catalog()) std::cout << c.id << '\t' << c.anchor << '\n';
        return 0;
    }
    if (*describe_cmd) {
        try {
            const auto& c = kmsd::check_info(check_id);
            std::cout << c.id << '\n'
                      << "anchor: " << c.anchor << '\n'
                      << c.description << '\n'
                      << "per time point: " << (c.per_time ? "yes" : "no") << '\n'
                      << "needs generator: " << (c.needs_generator ? "yes" : "no") << '\n';
        } catch (const kmsd::SpecError& e) {
            std::cerr << e.what() << '\n';
            return static_cast<int>(kmsd::ExitCode::Validation);
        }
    }
    return 0;
}
