#pragma once

#include <cstdint>

#include "kmsd/report.hpp"
#include "kmsd/standard_form.hpp"
#include "kmsd/superoperator.hpp"

namespace kmsd {

/// d_X^{mu,nu} = i (mu X - nu j(X^*)), i.e. xi -> i (mu X xi - nu xi X).
SuperOperator derivation(const Matrix& x, double mu, double nu);

HSVector derivation_apply(const AffiliatedOperator& x, double mu, double nu, const HSVector& xi);

/// E_X^{mu,nu}[xi] = ||d_X^{mu,nu} xi||^2 + ||d_{X^*}^{nu,mu} xi||^2.
double form_value(const AffiliatedOperator& x, double mu, double nu, const HSVector& xi);

/// The same form for (mu, nu) = (lambda, 1/lambda), evaluated through the
/// expanded real expression
///   lambda^2 (||X xi||^2 + ||X J xi||^2) + lambda^-2 (||X^* xi||^2 + ||X^* J xi||^2)
///   - 2 Re[(X xi | xi X) + (X^* xi | xi X^*)].
/// Only meaningful for Hermitian xi: the cross term is not real otherwise.
double form_value_expanded(const AffiliatedOperator& x, double lambda, const HSVector& xi);

/// |d_X^lambda|^2 + |d_{X^*}^{1/lambda}|^2 built by composing the derivations
/// with their Hilbert-Schmidt adjoints.
SuperOperator generator_direct(const AffiliatedOperator& x, double lambda);

/// The same generator written out as sandwich terms:
///   lambda^2 (X^*X xi + xi X^*X) + lambda^-2 (XX^* xi + xi XX^*) - 2 (X^* xi X + X xi X^*).
SuperOperator generator_expanded(const AffiliatedOperator& x, double lambda);

/// Q = (lambda^2 - 1) X^*X + (lambda^-2 - 1) XX^*.
AffiliatedOperator q_operator(const AffiliatedOperator& x, double lambda);

/// Q = (lambda - 1/lambda)^2 X^*X + (lambda^-2 - 1) [X, X^*].
AffiliatedOperator q_operator_commutator_form(const AffiliatedOperator& x, double lambda);

/// Q + j(Q) on Hilbert-Schmidt space.
SuperOperator q_superop(const AffiliatedOperator& x, double lambda);

/// A Dirichlet generator H_X^lambda with lambda = sqrt(mu/nu). Immutable
/// after construction; the dense realization is populated eagerly so that
/// instances can be shared between threads.
class DirichletGenerator {
public:
    DirichletGenerator(AffiliatedOperator x, double mu, double nu, const StandardFormContext& ctx);

    /// mu = lambda, nu = 1/lambda.
    static DirichletGenerator from_lambda(AffiliatedOperator x, double lambda, const StandardFormContext& ctx);

    const AffiliatedOperator& x() const { return x_; }
    double mu() const { return mu_; }
    double nu() const { return nu_; }
    double lambda() const { return lambda_; }
    const SuperOperator& h() const { return h_; }
    const Matrix& dense() const { return h_.dense(); }
    const StandardFormContext& context() const { return *ctx_; }
    /// Operator norm of the dense realization.
    double norm() const { return norm_; }

private:
    AffiliatedOperator x_;
    double mu_;
    double nu_;
    double lambda_;
    SuperOperator h_;
    std::shared_ptr<const StandardFormContext> ctx_;
    double norm_ = 0.0;
};

/// Dense-realization distance between the two generator assemblies.
Report generator_identity_check(const AffiliatedOperator& x, double lambda);

/// H - (|d_X|^2 + |d_{X^*}|^2) against
/// (lambda^2 - 1)(X^*X + j(X^*X)) + (lambda^-2 - 1)(XX^* + j(XX^*)).
Report coercivity_identity_check(const DirichletGenerator& gen);

/// Smallest eigenvalue of H minus the (eps, delta) coercivity lower bound.
/// Throws SpecError unless eps, delta > 0.
Report coercivity_bound_check(const DirichletGenerator& gen, double eps, double delta);

/// Sorted eigenvalues of Q + j(Q) are dominated index by index by those of H.
Report minmax_domination_check(const DirichletGenerator& gen);

/// Re E(xi_+ | xi_-) <= 1e-10 for `samples` random unit Hermitian xi.
Report beurling_deny_check(const DirichletGenerator& gen, int samples, std::uint64_t seed);

/// H maps Hermitian vectors to Hermitian vectors.
Report j_reality_check(const DirichletGenerator& gen, int samples, std::uint64_t seed);

/// Both sides of the conservativeness equivalence:
///   (a) E[xi0] = 0,
///   (b) Delta^{1/2} X xi0 = (mu/nu) X xi0 and S0(X xi0) = X^* xi0.
/// Passes iff both hold; a disagreement between (a) and (b) is reported in
/// the note as a violated equivalence.
Report conservativeness_check(const AffiliatedOperator& x, double mu, double nu, const StandardFormContext& ctx,
                              double tol = 1e-10);

/// d_X^lambda i0(y) = i0(i[X, y]) and the left/right representation of the
/// derivation on i0(y) for random y. NotApplicable when X xi0 is not a
/// Delta^{1/4} eigenvector with eigenvalue lambda.
Report intertwining_check(const AffiliatedOperator& x, double lambda, const StandardFormContext& ctx, int samples,
                          std::uint64_t seed);

}  // namespace kmsd
