#include "kmsd/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kmsd/dirichlet.hpp"
#include "kmsd/semigroup.hpp"
#include "kmsd/standard_form.hpp"

namespace kmsd {

using json = nlohmann::json;

const std::vector<CheckInfo>& check_catalog()
{
    static const std::vector<CheckInfo> catalog = {
        {"product_identity", "fock.ladder-power-products",
         "X^*X and XX^* of X = (A^*)^m against the rising and falling products of N", false, false},
        {"generator_identity", "dirichlet.generator-sandwich-expansion",
         "|d_X|^2 + |d_X*|^2 against the six-term sandwich expansion of H", false, true},
        {"coercivity_identity", "dirichlet.coercivity-splitting-identity",
         "H - H(lambda=1) = (lambda^2-1)(X*X + j(X*X)) + (lambda^-2-1)(XX* + j(XX*))", false, true},
        {"coercivity_bound", "dirichlet.coercivity-lower-bound",
         "H dominates the (eps, delta) lower bound with eps = delta = 1, i.e. H >= Q + j(Q)", false, true},
        {"minmax_domination", "dirichlet.q-operator-eigenvalue-domination",
         "sorted eigenvalues of Q + j(Q) stay below those of H", false, true},
        {"beurling_deny", "dirichlet.first-beurling-deny", "E(xi+ | xi-) <= 0 on random Hermitian xi", false, true},
        {"j_reality", "dirichlet.form-is-j-real", "H maps Hermitian vectors to Hermitian vectors", false, true},
        {"conservativeness", "dirichlet.conservative-iff-modular-eigenvector",
         "E[xi0] = 0 iff X xi0 is a Delta^{1/2} eigenvector with eigenvalue mu/nu", false, true},
        {"intertwining", "dirichlet.derivation-intertwines-commutator",
         "d_X i0(y) = i0(i[X, y]) and the form as a sum of commutator squares", false, true},
        {"semigroup_law", "semigroup.spectral-exponential",
         "semigroup law, contractivity and continuity of exp(-tH)", true, true},
        {"markov", "semigroup.order-interval-preservation", "exp(-tH) maps [0, xi0] into itself", true, true},
        {"complete_positivity", "semigroup.complete-positivity-choi", "Choi matrix of exp(-tH) is PSD", true, true},
        {"superbounded", "semigroup.superboundedness",
         "||rho^{-1/4} T_t xi rho^{-1/4}|| <= ||xi|| for G0 with H0 = g(N)", true, false},
        {"superbounded_threshold_scan", "semigroup.superboundedness-threshold",
         "empirical superboundedness threshold of G0 on a 0.05 grid against beta/4", false, false},
        {"counting_bound", "semigroup.counting-function-bound",
         "Sp(G0) as pairwise sums and n_G0(l) <= n_H0(l - l0)^2 for H0 = g(N)", false, false},
        {"q_slope", "semigroup.q-operator-leading-coefficient",
         "interior slope of diag Q for X = A^* equals (2 sinh(beta/4))^2", false, false},
        {"heat_trace", "semigroup.heat-trace-bound",
         "Tr exp(-tH) <= (sum_k exp(-t q(k)))^2 for X = (A^*)^m at matched lambda", true, false},
        {"modular_eigenvector", "deformation.modular-eigenvector", "Delta^{1/4} X xi0 = lambda X xi0", false, true},
        {"quadrature_crosscheck", "deformation.contour-vs-functional-calculus",
         "quadrature construction of X against A f^(beta k(N)), and f^ against its closed form", false, false},
        {"ccr_relations", "deformation.deformed-ccr", "X^*X, XX^* and [X, X^*] as functions of N", false, false},
        {"ccr_trend", "deformation.x-star-x-asymptotics", "asymptotics of (X^*X)_kk / k", false, false},
        {"hyperbolic_commutator", "deformation.hyperbolic-commutator", "[A^2, (A^*)^2] = 2 + 4N", false, false},
        {"supercontractive", "abelian.supercontractivity-threshold",
         "exp(-tV) is supercontractive on the atomic space iff t >= t0", true, false},
    };
    return catalog;
}

const CheckInfo& check_info(const std::string& id)
{
    for (const auto& c : check_catalog()) {
        if (c.id == id) return c;
    }
    throw SpecError("unknown check: " + id);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
    // splitmix64
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

// ---- strict JSON access -----------------------------------------------------

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw SpecError(where + " must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || item.key() == a;
        if (!known) throw SpecError("unknown key \"" + item.key() + "\" in " + where);
    }
}

double get_number(const json& v, const std::string& where)
{
    if (!v.is_number()) throw SpecError(where + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SpecError(where + " must be finite");
    return d;
}

int get_int(const json& v, const std::string& where)
{
    if (!v.is_number_integer()) throw SpecError(where + " must be an integer");
    return v.get<int>();
}

std::vector<double> get_numbers(const json& v, const std::string& where)
{
    if (!v.is_array()) throw SpecError(where + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Profile parse_profile(const json& g)
{
    if (!g.is_object() || !g.contains("kind")) throw SpecError("fock.g must be an object with a \"kind\"");
    const std::string kind = g["kind"].is_string() ? g["kind"].get<std::string>() : "";
    if (kind == "linear") {
        require_keys(g, "fock.g", {"kind"});
        return Profile::linear();
    }
    if (kind == "log") {
        require_keys(g, "fock.g", {"kind", "offset"});
        return Profile::log(g.contains("offset") ? get_number(g["offset"], "fock.g.offset") : 2.0);
    }
    if (kind == "table") {
        require_keys(g, "fock.g", {"kind", "values"});
        if (!g.contains("values")) throw SpecError("table profile needs \"values\"");
        return Profile::table(get_numbers(g["values"], "fock.g.values"));
    }
    throw SpecError("fock.g.kind must be linear, log or table");
}

FunctionSpec parse_function(const json& f)
{
    if (!f.is_object() || !f.contains("kind")) throw SpecError("deformed function must be an object with a \"kind\"");
    const std::string kind = f["kind"].is_string() ? f["kind"].get<std::string>() : "";
    if (kind == "cosh") {
        require_keys(f, "deformed", {"kind", "b"});
        return FunctionSpec::cosh(f.contains("b") ? get_number(f["b"], "deformed.b") : 0.0);
    }
    if (kind == "logcosh") {
        require_keys(f, "deformed", {"kind", "b", "r"});
        if (!f.contains("r")) throw SpecError("logcosh needs \"r\"");
        return FunctionSpec::logcosh(f.contains("b") ? get_number(f["b"], "deformed.b") : 0.0,
                                     get_number(f["r"], "deformed.r"));
    }
    if (kind == "table") {
        require_keys(f, "deformed", {"kind", "t", "re", "im"});
        if (!f.contains("t") || !f.contains("re")) throw SpecError("function table needs \"t\" and \"re\"");
        const auto t = get_numbers(f["t"], "deformed.t");
        const auto re = get_numbers(f["re"], "deformed.re");
        const auto im = f.contains("im") ? get_numbers(f["im"], "deformed.im") : std::vector<double>(re.size(), 0.0);
        if (re.size() != im.size()) throw SpecError("deformed.re and deformed.im differ in length");
        std::vector<Complex> vals(re.size());
        for (std::size_t i = 0; i < re.size(); ++i) vals[i] = {re[i], im[i]};
        return FunctionSpec::table(t, vals);
    }
    throw SpecError("deformed.kind must be cosh, logcosh or table");
}

QuadratureSpec parse_quadrature(const json& q)
{
    require_keys(q, "quadrature", {"half_width", "nodes", "rule"});
    QuadratureSpec out;
    if (q.contains("half_width")) out.half_width = get_number(q["half_width"], "quadrature.half_width");
    if (q.contains("nodes")) out.nodes = get_int(q["nodes"], "quadrature.nodes");
    if (q.contains("rule")) {
        const std::string rule = q["rule"].is_string() ? q["rule"].get<std::string>() : "";
        if (rule == "trapezoid") out.rule = QuadratureSpec::Rule::Trapezoid;
        else if (rule == "gauss") out.rule = QuadratureSpec::Rule::Gauss;
        else throw SpecError("quadrature.rule must be trapezoid or gauss");
    }
    out.validate();
    return out;
}

XSpec parse_x_spec(const json& x, const std::string& base_dir)
{
    require_keys(x, "x_spec", {"ladder_power", "deformed", "quadrature", "matrix_file"});
    const int kinds = x.contains("ladder_power") + x.contains("deformed") + x.contains("matrix_file");
    if (kinds != 1) throw SpecError("x_spec needs exactly one of ladder_power, deformed, matrix_file");
    if (x.contains("quadrature") && !x.contains("deformed")) throw SpecError("x_spec.quadrature needs deformed");
    if (x.contains("ladder_power")) return LadderPowerX{get_int(x["ladder_power"], "x_spec.ladder_power")};
    if (x.contains("deformed")) {
        DeformedX d{parse_function(x["deformed"]), {}};
        if (x.contains("quadrature")) d.quad = parse_quadrature(x["quadrature"]);
        return d;
    }
    if (!x["matrix_file"].is_string()) throw SpecError("x_spec.matrix_file must be a path");
    std::filesystem::path p(x["matrix_file"].get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return MatrixFileX{p.string()};
}

const std::set<std::string>& configurable_tolerances()
{
    static const std::set<std::string> ids = {"conservativeness", "modular_eigenvector"};
    return ids;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir)
{
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    require_keys(cfg, "scenario",
                 {"schema_version", "name", "fock", "x_spec", "lambda", "lambda_scale", "times", "checks", "tolerances",
                  "seed", "samples", "negative_controls", "atomic_space", "budget_seconds"});
    if (!cfg.contains("schema_version") || get_int(cfg["schema_version"], "schema_version") != kSchemaVersion)
        throw SpecError("schema_version must be " + std::to_string(kSchemaVersion));

    Scenario s;
    if (!cfg.contains("name") || !cfg["name"].is_string() || cfg["name"].get<std::string>().empty())
        throw SpecError("scenario needs a non-empty \"name\"");
    s.name = cfg["name"].get<std::string>();
    for (char c : s.name) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            throw SpecError("scenario name may only contain letters, digits, '_' and '-'");
    }

    if (!cfg.contains("fock")) throw SpecError("scenario needs \"fock\"");
    const json& f = cfg["fock"];
    require_keys(f, "fock", {"dim", "g", "beta"});
    if (!f.contains("dim") || !f.contains("beta")) throw SpecError("fock needs dim and beta");
    s.fock.dim = get_int(f["dim"], "fock.dim");
    s.fock.beta = get_number(f["beta"], "fock.beta");
    if (f.contains("g")) s.fock.g = parse_profile(f["g"]);
    s.fock.validate();

    if (cfg.contains("x_spec")) s.x_spec = parse_x_spec(cfg["x_spec"], base_dir);
    if (cfg.contains("lambda")) {
        const json& l = cfg["lambda"];
        if (l.is_string() && l.get<std::string>() == "auto") s.lambda_auto = true;
        else {
            s.lambda = get_number(l, "lambda");
            if (!(*s.lambda > 0.0)) throw SpecError("lambda must be positive");
        }
    }
    if (cfg.contains("lambda_scale")) {
        s.lambda_scale = get_number(cfg["lambda_scale"], "lambda_scale");
        if (!(s.lambda_scale > 0.0)) throw SpecError("lambda_scale must be positive");
    }
    if (cfg.contains("times")) {
        s.times = get_numbers(cfg["times"], "times");
        for (double t : s.times) {
            if (!(t >= 0.0)) throw SpecError("times must be nonnegative");
        }
    }
    if (cfg.contains("checks")) {
        if (!cfg["checks"].is_array()) throw SpecError("checks must be an array of check ids");
        for (const auto& c : cfg["checks"]) {
            if (!c.is_string()) throw SpecError("checks must be an array of check ids");
            check_info(c.get<std::string>());
            s.checks.push_back(c.get<std::string>());
        }
    }
    if (cfg.contains("tolerances")) {
        if (!cfg["tolerances"].is_object()) throw SpecError("tolerances must be an object");
        for (const auto& item : cfg["tolerances"].items()) {
            check_info(item.key());
            if (!configurable_tolerances().count(item.key()))
                throw SpecError("tolerance of " + item.key() + " is not configurable");
            const double tol = get_number(item.value(), "tolerances." + item.key());
            if (!(tol > 0.0)) throw SpecError("tolerances must be positive");
            s.tolerances[item.key()] = tol;
        }
    }
    if (cfg.contains("seed")) {
        if (!cfg["seed"].is_number_unsigned() && !(cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0))
            throw SpecError("seed must be a nonnegative integer");
        s.seed = cfg["seed"].get<std::uint64_t>();
    }
    if (cfg.contains("samples")) {
        s.samples = get_int(cfg["samples"], "samples");
        if (s.samples < 0) throw SpecError("samples must be nonnegative");
    }
    if (cfg.contains("negative_controls")) {
        if (!cfg["negative_controls"].is_array()) throw SpecError("negative_controls must be an array of check ids");
        for (const auto& c : cfg["negative_controls"]) {
            if (!c.is_string()) throw SpecError("negative_controls must be an array of check ids");
            const std::string id = c.get<std::string>();
            check_info(id);
            if (std::find(s.checks.begin(), s.checks.end(), id) == s.checks.end())
                throw SpecError("negative control " + id + " is not among the declared checks");
            s.negative_controls.push_back(id);
        }
    }
    if (cfg.contains("atomic_space")) {
        const json& a = cfg["atomic_space"];
        require_keys(a, "atomic_space", {"h", "U", "V"});
        if (!a.contains("U") || !a.contains("V")) throw SpecError("atomic_space needs U and V");
        AtomicSpaceSpec as;
        as.u = get_numbers(a["U"], "atomic_space.U");
        as.v = get_numbers(a["V"], "atomic_space.V");
        as.h = a.contains("h") ? get_numbers(a["h"], "atomic_space.h") : std::vector<double>(as.u.size(), 0.0);
        AtomicSpace(Eigen::Map<const RealVector>(as.h.data(), as.h.size()),
                    Eigen::Map<const RealVector>(as.u.data(), as.u.size()),
                    Eigen::Map<const RealVector>(as.v.data(), as.v.size()));
        s.atomic_space = as;
    }
    if (cfg.contains("budget_seconds")) {
        s.budget_seconds = get_number(cfg["budget_seconds"], "budget_seconds");
        if (!(*s.budget_seconds > 0.0)) throw SpecError("budget_seconds must be positive");
    }

    // requirements of the declared checks
    bool needs_x = false;
    for (const auto& id : s.checks) {
        const CheckInfo& info = check_info(id);
        if (info.per_time && s.times.empty()) throw SpecError(id + " needs a non-empty \"times\" array");
        needs_x = needs_x || info.needs_generator;
        if (id == "heat_trace" && !(s.x_spec && std::holds_alternative<LadderPowerX>(*s.x_spec)))
            throw SpecError("heat_trace needs x_spec.ladder_power");
        if ((id == "ccr_relations" || id == "ccr_trend" || id == "quadrature_crosscheck") &&
            !(s.x_spec && std::holds_alternative<DeformedX>(*s.x_spec)))
            throw SpecError(id + " needs x_spec.deformed");
        if (id == "supercontractive" && !s.atomic_space) throw SpecError("supercontractive needs atomic_space");
    }
    if (needs_x) {
        if (!s.x_spec) throw SpecError("the declared checks need x_spec");
        if (!s.lambda && !s.lambda_auto) throw SpecError("the declared checks need lambda (a number or \"auto\")");
    }
    if (s.x_spec) {
        if (const auto* lp = std::get_if<LadderPowerX>(&*s.x_spec)) {
            if (lp->m < 1 || lp->m >= s.fock.dim) throw SpecError("x_spec.ladder_power must be in [1, dim)");
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw SpecError("cannot read scenario file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    return parse_scenario(buf.str(), dir.empty() ? "." : dir.string());
}

Matrix load_matrix_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw SpecError("cannot read matrix file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("matrix file: ") + e.what());
    }
    require_keys(j, "matrix file", {"re", "im"});
    if (!j.contains("re") || !j["re"].is_array()) throw SpecError("matrix file needs \"re\" rows");
    const std::size_t n = j["re"].size();
    Matrix m = Matrix::Zero(n, n);
    for (const char* part : {"re", "im"}) {
        if (!j.contains(part)) continue;
        const json& rows = j[part];
        if (!rows.is_array() || rows.size() != n) throw SpecError(std::string("matrix file: \"") + part + "\" is not square");
        for (std::size_t r = 0; r < n; ++r) {
            const auto row = get_numbers(rows[r], std::string("matrix file ") + part);
            if (row.size() != n) throw SpecError(std::string("matrix file: \"") + part + "\" is not square");
            for (std::size_t c = 0; c < n; ++c) m(r, c) += part[0] == 'r' ? Complex(row[c]) : Complex(0.0, row[c]);
        }
    }
    return m;
}

ExitCode RunResult::exit_code() const
{
    for (const auto& r : reports) {
        if (r.expected_failure) {
            if (r.status != Status::Fail) return ExitCode::CheckFailed;
        } else if (r.status == Status::Fail) {
            return ExitCode::CheckFailed;
        }
    }
    return ExitCode::Ok;
}

namespace {

struct Unit {
    std::string check;
    std::optional<double> t;
    std::uint64_t seed;
};

std::vector<double> scan_grid()
{
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(0.05 * i);
    return grid;
}

}  // namespace

RunResult run_scenario(const Scenario& s, const RunOptions& opts)
{
    const std::uint64_t base_seed = opts.seed_override.value_or(s.seed);
    const GibbsData gibbs = gibbs_data(s.fock);
    const StandardFormContext ctx(gibbs);

    bool needs_x = false, needs_handle = false, needs_g0 = false;
    for (const auto& id : s.checks) {
        needs_x = needs_x || check_info(id).needs_generator;
        needs_handle = needs_handle || id == "semigroup_law" || id == "markov" || id == "complete_positivity";
        needs_g0 = needs_g0 || id == "superbounded" || id == "superbounded_threshold_scan";
    }

    std::optional<AffiliatedOperator> x;
    if (s.x_spec) {
        if (const auto* lp = std::get_if<LadderPowerX>(&*s.x_spec)) x = ladder_power(s.fock, lp->m);
        else if (const auto* d = std::get_if<DeformedX>(&*s.x_spec)) x = deformed_operator(d->f, s.fock, d->quad);
        else {
            Matrix m = load_matrix_file(std::get<MatrixFileX>(*s.x_spec).path);
            if (m.rows() != s.fock.dim) throw SpecError("matrix file dimension does not match fock.dim");
            x = AffiliatedOperator{std::move(m), "custom"};
        }
    }

    RunResult result;
    result.seed = base_seed;
    double lambda = 0.0;
    if (needs_x) {
        if (s.lambda_auto) {
            const Report probe = modular_eigenvector_check(*x, ctx, 1.0);
            const double fitted = probe.residual("rayleigh_eigenvalue");
            if (!(probe.residual("relative_residual_at_rayleigh") <= 1e-8) || !(fitted > 0.0))
                throw SpecError("lambda \"auto\": X xi0 is not a Delta^{1/4} eigenvector (relative residual " +
                                std::to_string(probe.residual("relative_residual_at_rayleigh")) + ")");
            lambda = fitted;
        } else {
            lambda = *s.lambda;
        }
        lambda *= s.lambda_scale;
        result.lambda = lambda;
    }

    std::optional<DirichletGenerator> gen;
    if (needs_x) gen.emplace(DirichletGenerator::from_lambda(*x, lambda, ctx));
    std::optional<SemigroupHandle> handle;
    if (needs_handle) handle.emplace(SemigroupHandle::from_generator(*gen));
    const Matrix h0 = profile_operator(s.fock).matrix;
    std::optional<SemigroupHandle> g0;
    if (needs_g0) g0.emplace(SemigroupHandle::from_h0(h0, ctx));
    std::optional<AtomicSpace> atoms;
    if (s.atomic_space) {
        const auto& a = *s.atomic_space;
        atoms.emplace(Eigen::Map<const RealVector>(a.h.data(), a.h.size()),
                      Eigen::Map<const RealVector>(a.u.data(), a.u.size()),
                      Eigen::Map<const RealVector>(a.v.data(), a.v.size()));
    }

    std::vector<Unit> units;
    for (const auto& id : s.checks) {
        if (check_info(id).per_time) {
            for (double t : s.times) units.push_back({id, t, derive_seed(base_seed, units.size())});
        } else {
            units.push_back({id, std::nullopt, derive_seed(base_seed, units.size())});
        }
    }

    auto tolerance = [&](const std::string& id, double fallback) {
        const auto it = s.tolerances.find(id);
        return it == s.tolerances.end() ? fallback : it->second;
    };
    const int samples = s.samples;

    auto run_unit = [&](const Unit& u) -> Report {
        const std::string& id = u.check;
        const double t = u.t.value_or(0.0);
        if (id == "product_identity") {
            const int m = x && std::holds_alternative<LadderPowerX>(*s.x_spec) ? std::get<LadderPowerX>(*s.x_spec).m : 1;
            return product_identity_check(s.fock, m);
        }
        if (id == "generator_identity") return generator_identity_check(*x, lambda);
        if (id == "coercivity_identity") return coercivity_identity_check(*gen);
        if (id == "coercivity_bound") return coercivity_bound_check(*gen, 1.0, 1.0);
        if (id == "minmax_domination") return minmax_domination_check(*gen);
        if (id == "beurling_deny") return beurling_deny_check(*gen, samples, u.seed);
        if (id == "j_reality") return j_reality_check(*gen, samples, u.seed);
        if (id == "conservativeness")
            return conservativeness_check(*x, lambda, 1.0 / lambda, ctx, tolerance(id, 1e-10));
        if (id == "intertwining") return intertwining_check(*x, lambda, ctx, samples, u.seed);
        if (id == "semigroup_law") return semigroup_law_check(*handle, t, t, samples, u.seed);
        if (id == "markov") return markov_check(*handle, t, samples, u.seed);
        if (id == "complete_positivity") return cp_check(*handle, t);
        if (id == "superbounded") return superbounded_check(*g0, t, samples, u.seed);
        if (id == "superbounded_threshold_scan")
            return superbounded_threshold_scan(*g0, scan_grid(), samples, u.seed, s.fock.beta / 4.0 + 0.05 + 1e-12);
        if (id == "counting_bound") return counting_bound_check(h0);
        if (id == "q_slope") return q_slope_check(s.fock);
        if (id == "heat_trace") return heat_trace_check(s.fock, std::get<LadderPowerX>(*s.x_spec).m, t);
        if (id == "modular_eigenvector") return modular_eigenvector_check(*x, ctx, lambda, tolerance(id, 1e-9));
        if (id == "quadrature_crosscheck") {
            const auto& d = std::get<DeformedX>(*s.x_spec);
            return quadrature_crosscheck(d.f, s.fock, d.quad, 20, u.seed);
        }
        if (id == "ccr_relations") {
            const auto& d = std::get<DeformedX>(*s.x_spec);
            return ccr_relations_check(*x, d.f, s.fock, d.quad);
        }
        if (id == "ccr_trend") {
            const auto& d = std::get<DeformedX>(*s.x_spec);
            return ccr_trend_check(d.f, s.fock, d.quad);
        }
        if (id == "hyperbolic_commutator") return hyperbolic_commutator_check(s.fock);
        if (id == "supercontractive") return supercontractive_check(*atoms, t, samples, u.seed);
        throw SpecError("unknown check: " + id);
    };

    std::vector<Report> reports(units.size());
    std::vector<std::exception_ptr> errors(units.size());
    std::map<std::string, double> spent;
    std::mutex spent_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < units.size(); i = next++) {
            const Unit& u = units[i];
            if (s.budget_seconds) {
                std::lock_guard<std::mutex> lock(spent_mutex);
                if (spent[u.check] > *s.budget_seconds) {
                    Report r;
                    r.check_id = u.check;
                    r.anchor = check_info(u.check).anchor;
                    if (u.t) r.parameters["t"] = *u.t;
                    r.status = Status::Skipped;
                    r.note = "skipped (budget)";
                    reports[i] = std::move(r);
                    continue;
                }
            }
            const auto start = std::chrono::steady_clock::now();
            try {
                reports[i] = run_unit(u);
            } catch (...) {
                errors[i] = std::current_exception();
                continue;
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            reports[i].wall_seconds = secs;
            if (s.budget_seconds) {
                std::lock_guard<std::mutex> lock(spent_mutex);
                spent[u.check] += secs;
            }
        }
    };

    const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(units.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t i = 0; i < units.size(); ++i) {
        Report& r = reports[i];
        if (r.anchor != check_info(units[i].check).anchor) r.anchor = check_info(units[i].check).anchor;
        if (std::find(s.negative_controls.begin(), s.negative_controls.end(), units[i].check) !=
            s.negative_controls.end()) {
            r.expected_failure = true;
        }
    }
    result.reports = std::move(reports);
    if (handle) result.spectra.push_back({"generator", handle->spectrum().eigenvalues});
    else if (gen) result.spectra.push_back({"generator", compute_spectrum(gen->dense()).eigenvalues});
    if (g0) result.spectra.push_back({"g0", g0->spectrum().eigenvalues});
    return result;
}

nlohmann::ordered_json results_json(const Scenario& s, const RunResult& r, bool include_wall_time)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario"] = s.name;
    j["seed"] = r.seed;
    j["lambda"] = r.lambda;
    j["exit_code"] = static_cast<int>(r.exit_code());
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rep : r.reports) arr.push_back(to_json(rep, include_wall_time));
    j["reports"] = std::move(arr);
    return j;
}

std::vector<std::string> emit_results(const Scenario& s, const RunResult& r, const std::string& out_dir,
                                      const std::string& format)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());
    std::vector<std::string> written;

    auto open = [&](const fs::path& p) {
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        written.push_back(p.string());
        return out;
    };

    if (format == "json") {
        auto out = open(fs::path(out_dir) / (s.name + "_report.json"));
        out << results_json(s, r).dump(2) << '\n';
    } else if (format == "csv") {
        auto out = open(fs::path(out_dir) / (s.name + "_report.csv"));
        out << "check,anchor,status,expected_failure,tolerance,residual,value\n" << std::setprecision(17);
        for (const auto& rep : r.reports) {
            if (rep.residuals.empty()) {
                out << rep.check_id << ',' << rep.anchor << ',' << to_string(rep.status) << ',' << rep.expected_failure
                    << ',' << rep.tolerance << ",,\n";
            }
            for (const auto& [name, value] : rep.residuals) {
                out << rep.check_id << ',' << rep.anchor << ',' << to_string(rep.status) << ',' << rep.expected_failure
                    << ',' << rep.tolerance << ',' << name << ',' << value << '\n';
            }
        }
    } else {
        throw SpecError("format must be json or csv");
    }

    for (const auto& sp : r.spectra) {
        auto out = open(fs::path(out_dir) / (s.name + "_" + sp.object + "_spectrum.csv"));
        out << "index,eigenvalue\n" << std::setprecision(17);
        for (Index i = 0; i < sp.eigenvalues.size(); ++i) out << i << ',' << sp.eigenvalues[i] << '\n';
        out.close();
        const fs::path counting = fs::path(out_dir) / (s.name + "_" + sp.object + "_counting.csv");
        write_counting_csv(counting.string(), Spectrum{sp.eigenvalues, Matrix(), 0.0});
        written.push_back(counting.string());
    }
    return written;
}

}  // namespace kmsd
