#include "kmsd/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <type_traits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace kmsd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTailLimit = 1e-10;

// ln(e - 1 + cosh x) without overflow for large |x|
double log_e_cosh(double x)
{
    const double a = std::abs(x);
    const double e = std::exp(-a);
    return a - std::log(2.0) + std::log1p(2.0 * (std::exp(1.0) - 1.0) * e + e * e);
}

double logcosh_envelope(double t, double r)
{
    return std::pow(log_e_cosh(8.0 * kPi * t), -r);
}

struct Node {
    double t;
    double w;
};

std::vector<Node> quadrature_nodes(const QuadratureSpec& quad)
{
    quad.validate();
    const double T = quad.half_width;
    std::vector<Node> nodes(quad.nodes);
    if (quad.rule == QuadratureSpec::Rule::Trapezoid) {
        const double h = 2.0 * T / (quad.nodes - 1);
        for (int i = 0; i < quad.nodes; ++i) nodes[i] = {-T + i * h, (i == 0 || i == quad.nodes - 1) ? 0.5 * h : h};
    } else {
        std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
            gsl_integration_glfixed_table_alloc(quad.nodes), &gsl_integration_glfixed_table_free);
        if (!table) throw std::runtime_error("cannot allocate Gauss-Legendre table");
        for (int i = 0; i < quad.nodes; ++i)
            gsl_integration_glfixed_point(-T, T, i, &nodes[i].t, &nodes[i].w, table.get());
    }
    return nodes;
}

void check_tail(const FunctionSpec& f, double T)
{
    const double tail = std::max(std::abs(f(-T)), std::abs(f(T)));
    if (tail > kTailLimit)
        throw SpecError("quadrature window too short: |f(+-T)| = " + std::to_string(tail) + " exceeds 1e-10");
}

struct LogCoshParams {
    double r;
};

double logcosh_integrand(double t, void* p)
{
    return logcosh_envelope(t, static_cast<LogCoshParams*>(p)->r);
}

// 2 int_0^inf h(t) cos(omega t) dt for the even envelope h
double logcosh_hat(double omega, double r)
{
    constexpr std::size_t kLimit = 2000;
    LogCoshParams params{r};
    gsl_function fn{&logcosh_integrand, &params};
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
        gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> cycle(
        gsl_integration_workspace_alloc(kLimit), &gsl_integration_workspace_free);
    double result = 0.0, err = 0.0;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    int status;
    if (std::abs(omega) < 1e-12) {
        status = gsl_integration_qagiu(&fn, 0.0, 1e-11, 1e-10, kLimit, ws.get(), &result, &err);
    } else {
        std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> table(
            gsl_integration_qawo_table_alloc(std::abs(omega), 1.0, GSL_INTEG_COSINE, 50),
            &gsl_integration_qawo_table_free);
        status = gsl_integration_qawf(&fn, 0.0, 1e-11, kLimit, ws.get(), cycle.get(), table.get(), &result, &err);
    }
    gsl_set_error_handler(old);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw ConditioningError(std::string("logcosh Fourier integral failed: ") + gsl_strerror(status));
    return 2.0 * result;
}

}  // namespace

FunctionSpec FunctionSpec::logcosh(double b, double r)
{
    if (r == 1.0) throw SpecError("logcosh with r = 1 is out of scope: f is not integrable (weak interpretation)");
    if (!(r > 1.0)) throw SpecError("logcosh requires r > 1");
    return FunctionSpec(LogCosh{b, r});
}

FunctionSpec FunctionSpec::table(std::vector<double> t, std::vector<Complex> f)
{
    if (t.size() != f.size()) throw SpecError("function table: t and f differ in length");
    if (t.size() < 2) throw SpecError("function table needs at least two samples");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(f[i].real()) || !std::isfinite(f[i].imag()))
            throw SpecError("function table contains a non-finite value");
        if (i > 0 && !(t[i] > t[i - 1])) throw SpecError("function table grid must be strictly ascending");
    }
    return FunctionSpec(Table{std::move(t), std::move(f)});
}

Complex FunctionSpec::operator()(double t) const
{
    return std::visit(
        [t](const auto& v) -> Complex {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Cosh>) {
                return std::polar(1.0, v.b * t) / std::cosh(8.0 * kPi * t);
            } else if constexpr (std::is_same_v<V, LogCosh>) {
                return std::polar(1.0, v.b * t) * logcosh_envelope(t, v.r);
            } else {
                if (t < v.t.front() || t > v.t.back()) return Complex(0.0);
                const auto it = std::upper_bound(v.t.begin(), v.t.end(), t);
                if (it == v.t.end()) return v.f.back();
                const std::size_t i = static_cast<std::size_t>(it - v.t.begin()) - 1;
                const double a = (t - v.t[i]) / (v.t[i + 1] - v.t[i]);
                return (1.0 - a) * v.f[i] + a * v.f[i + 1];
            }
        },
        v_);
}

const char* FunctionSpec::kind() const
{
    switch (v_.index()) {
    case 0: return "cosh";
    case 1: return "logcosh";
    default: return "table";
    }
}

std::optional<double> FunctionSpec::lambda_target() const
{
    if (const auto* c = std::get_if<Cosh>(&v_)) return std::exp(-c->b / 4.0);
    if (const auto* l = std::get_if<LogCosh>(&v_)) return std::exp(-l->b / 4.0);
    return std::nullopt;
}

void QuadratureSpec::validate() const
{
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw SpecError("quadrature half-width must be positive");
    if (nodes < 64) throw SpecError("quadrature needs at least 64 nodes");
}

Complex fourier_hat(const FunctionSpec& f, double s, const QuadratureSpec& quad)
{
    if (const auto* l = std::get_if<FunctionSpec::LogCosh>(&f.variant())) return logcosh_hat(s + l->b, l->r);
    if (const auto* tab = std::get_if<FunctionSpec::Table>(&f.variant())) {
        Complex acc(0.0);
        for (std::size_t i = 0; i + 1 < tab->t.size(); ++i) {
            const Complex a = tab->f[i] * std::polar(1.0, s * tab->t[i]);
            const Complex b = tab->f[i + 1] * std::polar(1.0, s * tab->t[i + 1]);
            acc += 0.5 * (a + b) * (tab->t[i + 1] - tab->t[i]);
        }
        return acc;
    }
    Complex acc(0.0);
    for (const Node& n : quadrature_nodes(quad)) acc += n.w * f(n.t) * std::polar(1.0, s * n.t);
    return acc;
}

Complex fourier_hat_closed(const FunctionSpec& f, double s)
{
    const auto* c = std::get_if<FunctionSpec::Cosh>(&f.variant());
    if (!c) throw SpecError(std::string("no closed form for the ") + f.kind() + " family");
    return 1.0 / (8.0 * std::cosh((s + c->b) / 16.0));
}

std::vector<Complex> deformation_multipliers(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad)
{
    spec.validate();
    const bool closed = std::holds_alternative<FunctionSpec::Cosh>(f.variant());
    std::vector<Complex> out(spec.dim);
    for (int k = 0; k < spec.dim; ++k) {
        const double s = spec.beta * (spec.g(k) - spec.g(k - 1));
        out[k] = closed ? fourier_hat_closed(f, s) : fourier_hat(f, s, quad);
    }
    return out;
}

AffiliatedOperator deformed_operator(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad)
{
    const std::vector<Complex> phi = deformation_multipliers(f, spec, quad);
    Matrix x = Matrix::Zero(spec.dim, spec.dim);
    for (int k = 1; k < spec.dim; ++k) x(k - 1, k) = std::sqrt(static_cast<double>(k)) * phi[k];
    return {std::move(x), std::string("deformed ") + f.kind()};
}

AffiliatedOperator quadrature_operator(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad)
{
    spec.validate();
    std::vector<Node> nodes;
    if (const auto* tab = std::get_if<FunctionSpec::Table>(&f.variant())) {
        check_tail(f, std::min(-tab->t.front(), tab->t.back()));
        for (std::size_t i = 0; i < tab->t.size(); ++i) {
            const double left = i > 0 ? tab->t[i] - tab->t[i - 1] : 0.0;
            const double right = i + 1 < tab->t.size() ? tab->t[i + 1] - tab->t[i] : 0.0;
            nodes.push_back({tab->t[i], 0.5 * (left + right)});
        }
    } else {
        check_tail(f, quad.half_width);
        nodes = quadrature_nodes(quad);
    }
    Matrix x = Matrix::Zero(spec.dim, spec.dim);
    for (int k = 1; k < spec.dim; ++k) {
        const double gk = spec.beta * spec.g(k);
        const double gk1 = spec.beta * spec.g(k - 1);
        Complex acc(0.0);
        // (exp(-it beta g(N)) A exp(it beta g(N)))(k-1, k)
        for (const Node& n : nodes) acc += n.w * f(n.t) * std::polar(1.0, -n.t * gk1) * std::polar(1.0, n.t * gk);
        x(k - 1, k) = std::sqrt(static_cast<double>(k)) * acc;
    }
    return {std::move(x), std::string("quadrature ") + f.kind()};
}

Report quadrature_crosscheck(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad, int samples,
                             std::uint64_t seed)
{
    if (!std::holds_alternative<FunctionSpec::Cosh>(f.variant()))
        throw SpecError("quadrature cross-check needs the cosh family");
    const Matrix xq = quadrature_operator(f, spec, quad).matrix;
    const Matrix xc = deformed_operator(f, spec, quad).matrix;
    const double op_diff = (xq - xc).norm();

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    double hat_rel = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double s = u(rng);
        const Complex exact = fourier_hat_closed(f, s);
        hat_rel = std::max(hat_rel, std::abs(fourier_hat(f, s, quad) - exact) / std::abs(exact));
    }

    Report rep;
    rep.check_id = "quadrature_crosscheck";
    rep.anchor = "deformation.contour-vs-functional-calculus";
    rep.parameters = {{"dim", spec.dim}, {"beta", spec.beta}, {"profile", spec.g.kind()},
                      {"half_width", quad.half_width}, {"nodes", quad.nodes},
                      {"rule", quad.rule == QuadratureSpec::Rule::Gauss ? "gauss" : "trapezoid"},
                      {"samples", samples}, {"seed", seed}};
    rep.add_residual("operator_difference", op_diff);
    rep.add_residual("fourier_hat_max_relative_error", hat_rel);
    rep.tolerance = 1e-6;
    rep.status = verdict(op_diff <= rep.tolerance && hat_rel <= rep.tolerance);
    return rep;
}

Report modular_eigenvector_check(const AffiliatedOperator& x, const StandardFormContext& ctx, double lambda,
                                 double tol)
{
    const HSVector v(x.matrix * ctx.xi0().matrix());
    const double vn = v.norm();
    if (!(vn > 0.0)) throw SpecError("modular_eigenvector_check: X xi0 vanishes");
    const HSVector dv = modular_power(0.25, v, ctx);
    const double rel = (dv - lambda * v).norm() / vn;
    const double fitted = hs_inner(v, dv).real() / (vn * vn);
    const double fitted_rel = (dv - fitted * v).norm() / vn;

    Report rep;
    rep.check_id = "modular_eigenvector";
    rep.anchor = "deformation.modular-eigenvector";
    rep.parameters = {{"dim", x.dim()}, {"lambda", lambda}, {"operator", x.label}};
    rep.add_residual("relative_residual", rel);
    rep.add_residual("rayleigh_eigenvalue", fitted);
    rep.add_residual("relative_residual_at_rayleigh", fitted_rel);
    rep.tolerance = tol;
    rep.status = verdict(rel <= tol);
    if (rep.status == Status::Fail && fitted_rel > tol) rep.note = "X xi0 is not an eigenvector of Delta^{1/4}";
    return rep;
}

Report ccr_relations_check(const AffiliatedOperator& x, const FunctionSpec& f, const FockSpec& spec,
                           const QuadratureSpec& quad)
{
    if (x.dim() != spec.dim) throw SpecError("ccr_relations_check: dimension mismatch");
    const std::vector<Complex> phi = deformation_multipliers(f, spec, quad);
    const int d = spec.dim;
    RealVector xsx_expected(d), xxs_expected(d);
    for (int k = 0; k < d; ++k) {
        xsx_expected[k] = std::norm(phi[k]) * k;
        xxs_expected[k] = k + 1 < d ? std::norm(phi[k + 1]) * (k + 1) : 0.0;
    }
    const Matrix xsx = x.matrix.adjoint() * x.matrix;
    const Matrix xxs = x.matrix * x.matrix.adjoint();
    const Matrix comm = xxs - xsx;

    double r1 = 0.0, r2 = 0.0, r3 = 0.0, scale = 1.0;
    for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
            const double e1 = j == k ? xsx_expected[k] : 0.0;
            r1 = std::max(r1, std::abs(xsx(j, k) - e1));
            scale = std::max(scale, std::abs(e1));
            if (j > d - 2 || k > d - 2) continue;
            const double e2 = j == k ? xxs_expected[k] : 0.0;
            r2 = std::max(r2, std::abs(xxs(j, k) - e2));
            r3 = std::max(r3, std::abs(comm(j, k) - (e2 - e1)));
        }
    }

    Report rep;
    rep.check_id = "ccr_relations";
    rep.anchor = "deformation.deformed-ccr";
    rep.parameters = {{"dim", d}, {"beta", spec.beta}, {"profile", spec.g.kind()}, {"function", f.kind()}};
    rep.add_residual("x_star_x", r1);
    rep.add_residual("x_x_star_interior", r2);
    rep.add_residual("commutator_interior", r3);
    rep.boundary_indices = {d - 1};
    rep.tolerance = 1e-12 * scale;
    rep.status = verdict(std::max({r1, r2, r3}) <= rep.tolerance);
    return rep;
}

Report hyperbolic_commutator_check(const FockSpec& spec)
{
    spec.validate();
    if (spec.dim < 5) throw SpecError("hyperbolic commutator check needs dim >= 5");
    const Matrix a = ladder(spec).annihilation.matrix;
    const Matrix x = a * a;
    const Matrix comm = x * x.adjoint() - x.adjoint() * x;
    const int d = spec.dim;
    double worst = 0.0;
    for (int j = 0; j <= d - 3; ++j)
        for (int k = 0; k <= d - 3; ++k) worst = std::max(worst, std::abs(comm(j, k) - (j == k ? 2.0 + 4.0 * k : 0.0)));

    Report rep;
    rep.check_id = "hyperbolic_commutator";
    rep.anchor = "deformation.hyperbolic-commutator";
    rep.parameters = {{"dim", d}};
    rep.add_residual("interior_residual", worst);
    rep.add_residual("value_at_k0", comm(0, 0).real());
    rep.add_residual("value_at_k3", comm(3, 3).real());
    rep.boundary_indices = {d - 2, d - 1};
    rep.tolerance = 1e-12;
    rep.status = verdict(worst <= rep.tolerance);
    return rep;
}

Report ccr_trend_check(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad)
{
    spec.validate();
    if (spec.dim < 10) throw SpecError("trend check needs dim >= 10");
    const AffiliatedOperator x = deformed_operator(f, spec, quad);
    const Matrix xsx = x.matrix.adjoint() * x.matrix;
    const int d = spec.dim;
    const int first = std::max(1, d - std::max(3, d / 4));

    bool gaps_grow = true;
    for (int k = first + 1; k < d; ++k) gaps_grow = gaps_grow && spec.g(k) - spec.g(k - 1) > spec.g(k - 1) - spec.g(k - 2);
    const double limit = std::norm(fourier_hat(f, 0.0, quad));

    bool monotone = true;
    double prev = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ratios;
    for (int k = first; k < d; ++k) {
        const double r = xsx(k, k).real() / k;
        ratios.push_back(r);
        const double key = gaps_grow ? r : std::abs(r - limit);
        if (!std::isnan(prev) && key > prev * (1.0 + 1e-12) + 1e-15) monotone = false;
        prev = key;
    }

    Report rep;
    rep.check_id = "ccr_trend";
    rep.anchor = "deformation.x-star-x-asymptotics";
    rep.parameters = {{"dim", d}, {"profile", spec.g.kind()}, {"function", f.kind()},
                      {"regime", gaps_grow ? "vanishing" : "linear"}, {"first_index", first}};
    rep.add_residual("ratio_first", ratios.front());
    rep.add_residual("ratio_last", ratios.back());
    rep.add_residual("limit_at_zero_gap", limit);
    rep.add_residual("monotone", monotone ? 1.0 : 0.0);
    bool ok = monotone;
    if (gaps_grow) ok = ok && ratios.back() < ratios.front();
    rep.tolerance = 0.0;
    rep.status = verdict(ok);
    return rep;
}

}  // namespace kmsd
