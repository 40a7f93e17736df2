#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kmsd/abelian.hpp"
#include "kmsd/deformation.hpp"
#include "kmsd/fock.hpp"
#include "kmsd/report.hpp"
#include "kmsd/standard_form.hpp"

namespace kmsd {

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed JSON (exit code 2).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExitCode : int { Ok = 0, CheckFailed = 1, Parse = 2, Validation = 3, Conditioning = 4 };

struct CheckInfo {
    std::string id;
    std::string anchor;
    std::string description;
    bool per_time = false;       // one report per entry of "times"
    bool needs_generator = false;
};

/// Every check a scenario may declare, in catalog order.
const std::vector<CheckInfo>& check_catalog();
/// Throws SpecError for an unknown id.
const CheckInfo& check_info(const std::string& id);

struct LadderPowerX {
    int m = 1;
};
struct DeformedX {
    FunctionSpec f = FunctionSpec::cosh(0.0);
    QuadratureSpec quad;
};
struct MatrixFileX {
    std::string path;  // resolved against the config's directory
};
using XSpec = std::variant<LadderPowerX, DeformedX, MatrixFileX>;

struct AtomicSpaceSpec {
    std::vector<double> h;
    std::vector<double> u;
    std::vector<double> v;
};

struct Scenario {
    std::string name;
    FockSpec fock;
    std::optional<XSpec> x_spec;
    /// Empty means "auto": the Delta^{1/4} eigenvalue of X xi0.
    std::optional<double> lambda;
    bool lambda_auto = false;
    /// Multiplies the resolved lambda; used to build mismatched controls.
    double lambda_scale = 1.0;
    std::vector<double> times;
    std::vector<std::string> checks;
    std::map<std::string, double> tolerances;
    std::uint64_t seed = 0;
    int samples = 50;
    std::vector<std::string> negative_controls;
    std::optional<AtomicSpaceSpec> atomic_space;
    /// Per-check wall-clock budget in seconds, enforced between time points.
    std::optional<double> budget_seconds;
};

/// Throws ParseError on malformed JSON and SpecError on schema violations
/// (unknown keys, wrong types, unknown checks, missing requirements).
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

/// Matrix file format: {"re": [[...]], "im": [[...]]}, "im" optional.
Matrix load_matrix_file(const std::string& path);

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

struct SpectrumExport {
    std::string object;  // "generator" or "g0"
    RealVector eigenvalues;
};

struct RunResult {
    std::vector<Report> reports;  // declaration order
    std::vector<SpectrumExport> spectra;
    double lambda = 0.0;          // resolved lambda (0 when not needed)
    std::uint64_t seed = 0;       // effective seed after overrides

    /// Ok iff every report passes, except negative controls, which must fail.
    ExitCode exit_code() const;
};

/// Runs the declared checks. Throws SpecError when the scenario cannot be
/// realized (for example, lambda "auto" on a non-eigenvector) and
/// ConditioningError on numerical aborts.
RunResult run_scenario(const Scenario& s, const RunOptions& opts = {});

/// {"schema_version", "scenario", "seed", "lambda", "reports": [...]}.
nlohmann::ordered_json results_json(const Scenario& s, const RunResult& r, bool include_wall_time = true);

/// Writes <name>_report.json or <name>_report.csv plus
/// <name>_<object>_spectrum.csv and <name>_<object>_counting.csv into
/// out_dir; returns the paths written.
std::vector<std::string> emit_results(const Scenario& s, const RunResult& r, const std::string& out_dir,
                                      const std::string& format);

/// Deterministic per-unit seed derived from the scenario seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace kmsd
