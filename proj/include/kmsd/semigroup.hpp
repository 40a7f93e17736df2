#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kmsd/dirichlet.hpp"
#include "kmsd/report.hpp"
#include "kmsd/standard_form.hpp"
#include "kmsd/superoperator.hpp"

namespace kmsd {

/// Eigendecomposition of a self-adjoint operator on Hilbert-Schmidt space.
struct Spectrum {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // orthonormal columns, column-stacked HS vectors
    double reconstruction_residual = 0.0;

    /// #{eigenvalues <= lambda + tol}
    Index count(double lambda, double tol = 1e-10) const;
};

/// Throws SpecError when m is not Hermitian to 1e-10 relative.
Spectrum compute_spectrum(const Matrix& dense);

/// T_t = exp(-tH) for a self-adjoint H on Hilbert-Schmidt space. The
/// spectrum is computed once at construction; every query afterwards is
/// const and may run concurrently.
class SemigroupHandle {
public:
    static SemigroupHandle from_generator(const DirichletGenerator& gen);
    /// G0 xi = H0 xi + xi H0, so T_t xi = exp(-tH0) xi exp(-tH0).
    static SemigroupHandle from_h0(const Matrix& h0, const StandardFormContext& ctx);
    /// Any Hermitian superoperator; used for dominating generators and for
    /// deliberately corrupted negative controls.
    static SemigroupHandle from_superoperator(SuperOperator h, const StandardFormContext& ctx, std::string label);

    const SuperOperator& generator() const { return h_; }
    const Spectrum& spectrum() const { return spectrum_; }
    const StandardFormContext& context() const { return *ctx_; }
    const std::string& label() const { return label_; }
    double norm() const;
    Index dim() const { return ctx_->dim(); }

    /// H0 for handles built with from_h0.
    const std::optional<Matrix>& h0() const { return h0_; }

    /// Dense exp(-tH). Throws SpecError for t < 0.
    Matrix propagator(double t) const;

    /// exp(-tH) xi through the eigendecomposition. Throws SpecError for t < 0.
    HSVector evolve(double t, const HSVector& xi) const;

    /// exp(-tH0) xi exp(-tH0); only for from_h0 handles.
    HSVector evolve_closed_form(double t, const HSVector& xi) const;

    /// ||H xi0||.
    double residual_on_xi0() const;
    bool conservative(double tol = 1e-9) const;

private:
    SemigroupHandle(SuperOperator h, const StandardFormContext& ctx, std::string label);

    SuperOperator h_;
    std::shared_ptr<const StandardFormContext> ctx_;
    std::string label_;
    std::optional<Matrix> h0_;
    Spectrum spectrum_;
};

/// Tr exp(-tH) = sum exp(-t eig). Throws SpecError unless t > 0.
double heat_trace(const SemigroupHandle& handle, double t);

/// Semigroup law ||T_{s+t} xi - T_s T_t xi||, contractivity, strong
/// continuity on a shrinking t grid, and the closed form for G0 handles.
Report semigroup_law_check(const SemigroupHandle& handle, double s, double t, int samples, std::uint64_t seed);

/// Order-interval preservation: for xi0^{1/2} C xi0^{1/2} with 0 <= C <= 1,
/// T_t xi >= 0 and (when conservative) xi0 - T_t xi >= 0, both to -1e-9.
/// Positivity is also tested on unbounded PSD samples.
Report markov_check(const SemigroupHandle& handle, double t, int samples, std::uint64_t seed);

/// Choi matrix of xi -> T_t xi is PSD to -1e-9 ||Choi||.
Report cp_check(const SemigroupHandle& handle, double t);

/// Choi matrix of a dense superoperator in the column-stacking convention.
Matrix choi_matrix(const Matrix& dense, Index dim);

/// For random unit J-real xi: x = rho^{-1/4} T_t xi rho^{-1/4}, pass iff
/// ||x||_op <= ||xi||_HS (1 + 1e-8) for every sample. Throws
/// ConditioningError when max w^{-1/4} exceeds kInverseQuarterWarning.
Report superbounded_check(const SemigroupHandle& handle, double t, int samples, std::uint64_t seed);

/// Pass rates of the superbounded test on a t grid (same samples at every
/// t). The empirical threshold is the smallest grid t from which every
/// sample passes at every larger grid point. Fails when no threshold is
/// found, when the pass rate is not monotone, or when the threshold exceeds
/// `expected_bound`.
Report superbounded_threshold_scan(const SemigroupHandle& handle, const std::vector<double>& grid, int samples,
                                   std::uint64_t seed, std::optional<double> expected_bound = std::nullopt);

/// Sp(G0) as pairwise sums of eigenvalues of H0 against the dense spectrum
/// of G0 (multiset, tol 1e-10), and n_{G0}(l) <= n_{H0}(l - l0)^2 at every
/// eigenvalue l of G0.
Report counting_bound_check(const Matrix& h0);

/// q(k) = (lambda^2 - 1)(k+1)...(k+m) + (lambda^-2 - 1) k(k-1)...(k-m+1)
/// with lambda^2 = exp(-m beta/2), for k = 0..dim-1.
RealVector ladder_q_closed_form(int m, double beta, int dim);

/// Interior slope of diag Q for X = A^* at matched lambda against
/// (lambda - 1/lambda)^2 = (2 sinh(beta/4))^2.
Report q_slope_check(const FockSpec& spec);

/// heat_trace(H, t) <= (sum_k exp(-t q(k)))^2 and
/// Tr exp(-t(Q + jQ)) = (Tr exp(-tQ))^2 for X = (A^*)^m at matched lambda.
Report heat_trace_check(const FockSpec& spec, int m, double t);

/// CSV writers: "index,eigenvalue" and "lambda,count" (one row per
/// distinct eigenvalue).
void write_spectrum_csv(const std::string& path, const Spectrum& s);
void write_counting_csv(const std::string& path, const Spectrum& s);

}  // namespace kmsd
