#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "kmsd/fock.hpp"
#include "kmsd/report.hpp"
#include "kmsd/standard_form.hpp"

namespace kmsd {

/// Window function f whose Fourier transform deforms the annihilator.
class FunctionSpec {
public:
    /// f(t) = exp(ibt) / cosh(8 pi t)
    struct Cosh {
        double b = 0.0;
    };
    /// f(t) = exp(ibt) / ln(e - 1 + cosh(8 pi t))^r, r > 1
    struct LogCosh {
        double b = 0.0;
        double r = 2.0;
    };
    /// f sampled on an ascending grid; integrated with the trapezoid rule.
    struct Table {
        std::vector<double> t;
        std::vector<Complex> f;
    };

    static FunctionSpec cosh(double b) { return FunctionSpec(Cosh{b}); }
    /// Throws SpecError for r = 1 (not integrable; out of scope) and r < 1.
    static FunctionSpec logcosh(double b, double r);
    /// Throws SpecError on mismatched lengths, fewer than 2 samples, a
    /// non-ascending grid, or non-finite values.
    static FunctionSpec table(std::vector<double> t, std::vector<Complex> f);

    Complex operator()(double t) const;
    const char* kind() const;
    const std::variant<Cosh, LogCosh, Table>& variant() const { return v_; }

    /// exp(-b/4) for the analytic families; empty for tables.
    std::optional<double> lambda_target() const;

private:
    explicit FunctionSpec(std::variant<Cosh, LogCosh, Table> v) : v_(std::move(v)) {}
    std::variant<Cosh, LogCosh, Table> v_;
};

struct QuadratureSpec {
    enum class Rule { Trapezoid, Gauss };
    double half_width = 2.0;
    int nodes = 4096;
    Rule rule = Rule::Trapezoid;

    /// Throws SpecError unless half_width > 0 and nodes >= 64.
    void validate() const;
};

/// f^(s) = int f(t) exp(ist) dt. The cosh family and tables use a fixed
/// rule on [-T, T] (tables: their own grid); the logcosh family uses an
/// oscillatory semi-infinite rule because its tail decays only like |t|^-r.
Complex fourier_hat(const FunctionSpec& f, double s, const QuadratureSpec& quad = {});

/// 1 / (8 cosh((s + b)/16)); cosh family only, SpecError otherwise.
Complex fourier_hat_closed(const FunctionSpec& f, double s);

/// f^(beta (g(k) - g(k-1))) for k = 0..dim-1, with g(-1) = g(0).
std::vector<Complex> deformation_multipliers(const FunctionSpec& f, const FockSpec& spec,
                                             const QuadratureSpec& quad = {});

/// X = A f^(beta k(N)): entry (k-1, k) = sqrt(k) f^(beta (g(k) - g(k-1))).
/// The cosh family uses the closed form of f^, the others fourier_hat.
AffiliatedOperator deformed_operator(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad = {});

/// int exp(-it beta g(N)) A exp(it beta g(N)) f(t) dt evaluated entrywise
/// by the quadrature rule. Throws SpecError when |f(+-T)| > 1e-10 (the
/// window is too short for the tail).
AffiliatedOperator quadrature_operator(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad);

/// ||X_quad - X_closed||_F against the closed-form operator, and the
/// relative error of the numeric f^ against the closed form at `samples`
/// seeded points in [-40, 40]. Both must be <= 1e-6. Cosh family only.
Report quadrature_crosscheck(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad, int samples,
                             std::uint64_t seed);

/// ||Delta^{1/4} X xi0 - lambda X xi0|| / ||X xi0|| <= tol. The report also
/// carries the Rayleigh quotient of Delta^{1/4} on X xi0 and the residual
/// against it.
Report modular_eigenvector_check(const AffiliatedOperator& x, const StandardFormContext& ctx, double lambda,
                                 double tol = 1e-9);

/// X^*X = |f^(beta k(N))|^2 N on every index; XX^* = |f^(beta k(N+1))|^2 (N+1)
/// and [X, X^*] = XX^* - X^*X on 0..dim-2 (dim-1 is a boundary index).
Report ccr_relations_check(const AffiliatedOperator& x, const FunctionSpec& f, const FockSpec& spec,
                           const QuadratureSpec& quad = {});

/// [A^2, (A^*)^2] e_k = (2 + 4k) e_k for k <= dim-3. Needs dim >= 5.
Report hyperbolic_commutator_check(const FockSpec& spec);

/// Asymptotics of (X^*X)_kk / k on the last quartile of interior indices:
/// when the gaps g(k) - g(k-1) grow, the ratio must decrease; otherwise its
/// distance to |f^(0)|^2 must not increase.
Report ccr_trend_check(const FunctionSpec& f, const FockSpec& spec, const QuadratureSpec& quad = {});

}  // namespace kmsd
