#pragma once

#include <cstdint>
#include <random>

#include "kmsd/fock.hpp"
#include "kmsd/superoperator.hpp"
#include "kmsd/types.hpp"

namespace kmsd {

/// Modular data of the Gibbs state at truncation. Everything here is
/// diagonal in the number basis, so the modular operator acts entrywise:
/// Delta^s scales entry (j, k) by (w_j / w_k)^s.
class StandardFormContext {
public:
    explicit StandardFormContext(GibbsData gibbs);

    const GibbsData& gibbs() const { return gibbs_; }
    Index dim() const { return gibbs_.spec.dim; }
    const HSVector& xi0() const { return gibbs_.xi0; }
    const RealVector& log_weights() const { return gibbs_.log_weights; }

    /// w^{1/4} and w^{-1/4}, computed from log weights.
    const RealVector& quarter() const { return quarter_; }
    const RealVector& inverse_quarter() const { return inverse_quarter_; }
    double max_inverse_quarter() const { return inverse_quarter_.maxCoeff(); }

    /// rho^s as a diagonal matrix; throws ConditioningError when an entry
    /// overflows.
    Matrix rho_power(double s) const;

private:
    GibbsData gibbs_;
    RealVector quarter_;
    RealVector inverse_quarter_;
};

/// Beyond this, rho^{-1/4} is considered ill-conditioned.
inline constexpr double kInverseQuarterWarning = 1e8;

/// Tr(xi^* eta).
Complex hs_inner(const HSVector& xi, const HSVector& eta);

/// i0(x) = rho^{1/4} x rho^{1/4}.
HSVector embed(const AffiliatedOperator& x, const StandardFormContext& ctx);

struct Unembedded {
    AffiliatedOperator x;
    bool ill_conditioned = false;  // max w^{-1/4} above kInverseQuarterWarning
    double max_factor = 0.0;
};

/// rho^{-1/4} xi rho^{-1/4}, the inverse of embed.
Unembedded unembed(const HSVector& xi, const StandardFormContext& ctx);

/// Delta^s xi for |s| <= 1. Throws SpecError outside that range and
/// ConditioningError naming the offending (j, k) if a factor overflows.
HSVector modular_power(double s, const HSVector& xi, const StandardFormContext& ctx);

/// Delta^{it} xi.
HSVector modular_unitary(double t, const HSVector& xi, const StandardFormContext& ctx);

/// J xi = xi^*. Antilinear, so it is never represented as a SuperOperator.
HSVector conj_J(const HSVector& xi);

/// S0 xi = J Delta^{1/2} xi = rho^{-1/2} xi^* rho^{1/2}.
HSVector s0_apply(const HSVector& xi, const StandardFormContext& ctx);

/// j(Y) xi = J Y J xi = xi Y^*.
HSVector j_action(const AffiliatedOperator& y, const HSVector& xi);

/// Superoperator form of j(Y): right multiplication by Y^*.
SuperOperator j_superop(const Matrix& y);

/// -ln Delta0: xi -> beta (g(N) xi - xi g(N)).
SuperOperator araki_hamiltonian(const StandardFormContext& ctx);

struct JordanParts {
    HSVector plus;
    HSVector minus;
    HSVector abs;
};

/// Spectral positive and negative parts of a Hermitian xi. Throws SpecError
/// when ||xi - xi^*|| exceeds 1e-10 ||xi||.
JordanParts jordan_decompose(const HSVector& xi);

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kConeTolerance = 1e-10;

/// J-real predicate: ||xi - xi^*|| <= tol * max(1, ||xi||).
bool is_j_real(const HSVector& xi, double tol = kHermitianTolerance);

/// Cone predicate: Hermitian and smallest eigenvalue >= -tol.
bool in_cone(const HSVector& xi, double tol = kConeTolerance);

/// Random 0 <= C <= 1 mapped to xi0^{1/2} C xi0^{1/2}, which lies in the
/// order interval [0, xi0]. Deterministic for a given seed.
HSVector sample_order_interval(const StandardFormContext& ctx, std::uint64_t seed);

/// xi0^{1/2} C xi0^{1/2} for a caller-provided C.
HSVector order_interval_image(const StandardFormContext& ctx, const Matrix& c);

/// Matrix with independent standard complex Gaussian entries.
Matrix random_gaussian(Index dim, std::mt19937_64& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phase fix).
Matrix random_unitary(Index dim, std::mt19937_64& rng);

/// Gaussian Hermitian matrix normalized to unit Hilbert-Schmidt norm.
HSVector random_hermitian_unit(Index dim, std::mt19937_64& rng);

/// Random positive semidefinite matrix U diag(u) U^* with u uniform in [lo, hi].
Matrix random_psd(Index dim, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0);

}  // namespace kmsd
