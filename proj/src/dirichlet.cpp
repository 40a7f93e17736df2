#include "kmsd/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace kmsd {

namespace {

constexpr Complex kI(0.0, 1.0);

RealVector sorted_eigenvalues(const Matrix& m)
{
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double hermitian_norm(const Matrix& m)
{
    const RealVector ev = sorted_eigenvalues(m);
    return std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
}

}  // namespace

SuperOperator derivation(const Matrix& x, double mu, double nu)
{
    return (kI * mu) * SuperOperator::left(x) - (kI * nu) * j_superop(x.adjoint());
}

HSVector derivation_apply(const AffiliatedOperator& x, double mu, double nu, const HSVector& xi)
{
    if (x.dim() != xi.dim()) throw SpecError("derivation_apply: dimension mismatch");
    return HSVector(kI * (mu * x.matrix * xi.matrix() - nu * xi.matrix() * x.matrix));
}

double form_value(const AffiliatedOperator& x, double mu, double nu, const HSVector& xi)
{
    return derivation_apply(x, mu, nu, xi).squared_norm() + derivation_apply(x.adjoint(), nu, mu, xi).squared_norm();
}

double form_value_expanded(const AffiliatedOperator& x, double lambda, const HSVector& xi)
{
    const Matrix& X = x.matrix;
    const Matrix Xs = X.adjoint();
    const HSVector jxi = conj_J(xi);
    const double l2 = lambda * lambda;
    const double direct = l2 * ((X * xi.matrix()).squaredNorm() + (X * jxi.matrix()).squaredNorm()) +
                          ((Xs * xi.matrix()).squaredNorm() + (Xs * jxi.matrix()).squaredNorm()) / l2;
    // (X xi | j(X^*) xi) + (X^* xi | j(X) xi) with j(Y) xi = xi Y^*
    const Complex cross = hs_inner(HSVector(X * xi.matrix()), HSVector(xi.matrix() * X)) +
                          hs_inner(HSVector(Xs * xi.matrix()), HSVector(xi.matrix() * Xs));
    return direct - 2.0 * cross.real();
}

SuperOperator generator_direct(const AffiliatedOperator& x, double lambda)
{
    const SuperOperator dx = derivation(x.matrix, lambda, 1.0 / lambda);
    const SuperOperator dxs = derivation(x.matrix.adjoint(), 1.0 / lambda, lambda);
    return dx.adjoint() * dx + dxs.adjoint() * dxs;
}

SuperOperator generator_expanded(const AffiliatedOperator& x, double lambda)
{
    const Matrix& X = x.matrix;
    const Matrix Xs = X.adjoint();
    const Matrix xsx = Xs * X;
    const Matrix xxs = X * Xs;
    const double l2 = lambda * lambda;
    SuperOperator h = l2 * (SuperOperator::left(xsx) + SuperOperator::right(xsx));
    h += (1.0 / l2) * (SuperOperator::left(xxs) + SuperOperator::right(xxs));
    h += -2.0 * (SuperOperator::sandwich(Xs, X) + SuperOperator::sandwich(X, Xs));
    return h;
}

AffiliatedOperator q_operator(const AffiliatedOperator& x, double lambda)
{
    const Matrix& X = x.matrix;
    const double l2 = lambda * lambda;
    Matrix q = (l2 - 1.0) * (X.adjoint() * X) + (1.0 / l2 - 1.0) * (X * X.adjoint());
    return {0.5 * (q + q.adjoint()), "Q(" + x.label + ")"};
}

AffiliatedOperator q_operator_commutator_form(const AffiliatedOperator& x, double lambda)
{
    const Matrix& X = x.matrix;
    const double gap = lambda - 1.0 / lambda;
    const Matrix comm = X * X.adjoint() - X.adjoint() * X;
    Matrix q = gap * gap * (X.adjoint() * X) + (1.0 / (lambda * lambda) - 1.0) * comm;
    return {0.5 * (q + q.adjoint()), "Q(" + x.label + ") commutator form"};
}

SuperOperator q_superop(const AffiliatedOperator& x, double lambda)
{
    const Matrix q = q_operator(x, lambda).matrix;
    return SuperOperator::left(q) + j_superop(q);
}

DirichletGenerator::DirichletGenerator(AffiliatedOperator x, double mu, double nu, const StandardFormContext& ctx)
    : x_(std::move(x)), mu_(mu), nu_(nu), lambda_(0.0), ctx_(std::make_shared<StandardFormContext>(ctx))
{
    if (!(mu > 0.0) || !(nu > 0.0)) throw SpecError("Dirichlet generator needs mu, nu > 0");
    if (x_.dim() != ctx.dim()) throw SpecError("generator operator does not match the context dimension");
    lambda_ = std::sqrt(mu / nu);
    // E^{mu,nu} = mu nu E^{lambda, 1/lambda}
    h_ = (mu * nu) * generator_expanded(x_, lambda_);
    norm_ = hermitian_norm(h_.dense());
}

DirichletGenerator DirichletGenerator::from_lambda(AffiliatedOperator x, double lambda, const StandardFormContext& ctx)
{
    if (!(lambda > 0.0)) throw SpecError("lambda must be positive");
    return DirichletGenerator(std::move(x), lambda, 1.0 / lambda, ctx);
}

Report generator_identity_check(const AffiliatedOperator& x, double lambda)
{
    const SuperOperator direct = generator_direct(x, lambda);
    const SuperOperator expanded = generator_expanded(x, lambda);
    const double hnorm = hermitian_norm(expanded.dense());
    const double diff = (direct.dense() - expanded.dense()).norm();

    Report rep;
    rep.check_id = "generator_identity";
    rep.anchor = "dirichlet.generator-sandwich-expansion";
    rep.parameters = {{"dim", x.dim()}, {"lambda", lambda}, {"operator", x.label}};
    rep.add_residual("dense_difference", diff);
    rep.add_residual("generator_norm", hnorm);
    rep.tolerance = 1e-11 * std::max(hnorm, 1.0);
    rep.status = verdict(diff <= rep.tolerance);
    return rep;
}

Report coercivity_identity_check(const DirichletGenerator& gen)
{
    const AffiliatedOperator& x = gen.x();
    const double lambda = gen.lambda();
    const double l2 = lambda * lambda;
    const Matrix xsx = x.matrix.adjoint() * x.matrix;
    const Matrix xxs = x.matrix * x.matrix.adjoint();

    // the generator proper, without the mu*nu scale of the (mu, nu) form
    const SuperOperator h = generator_expanded(x, lambda);
    const SuperOperator lhs = h - generator_direct(x, 1.0);
    const SuperOperator rhs = (l2 - 1.0) * (SuperOperator::left(xsx) + j_superop(xsx)) +
                              (1.0 / l2 - 1.0) * (SuperOperator::left(xxs) + j_superop(xxs));
    const double hnorm = hermitian_norm(h.dense());
    const double diff = (lhs.dense() - rhs.dense()).norm();

    Report rep;
    rep.check_id = "coercivity_identity";
    rep.anchor = "dirichlet.coercivity-splitting-identity";
    rep.parameters = {{"dim", x.dim()}, {"lambda", lambda}, {"operator", x.label}};
    rep.add_residual("dense_difference", diff);
    rep.add_residual("generator_norm", hnorm);
    rep.tolerance = 1e-11 * std::max(hnorm, 1.0);
    rep.status = verdict(diff <= rep.tolerance);
    return rep;
}

Report coercivity_bound_check(const DirichletGenerator& gen, double eps, double delta)
{
    if (!(eps > 0.0) || !(delta > 0.0)) throw SpecError("coercivity bound needs eps, delta > 0");
    const AffiliatedOperator& x = gen.x();
    const double l2 = gen.lambda() * gen.lambda();
    const Matrix xsx = x.matrix.adjoint() * x.matrix;
    const Matrix xxs = x.matrix * x.matrix.adjoint();

    const SuperOperator h = generator_expanded(x, gen.lambda());
    const SuperOperator bound = (l2 - eps * eps) * SuperOperator::left(xsx) +
                                (l2 - 1.0 / (eps * eps)) * j_superop(xsx) +
                                (1.0 / l2 - delta * delta) * SuperOperator::left(xxs) +
                                (1.0 / l2 - 1.0 / (delta * delta)) * j_superop(xxs);
    const double hnorm = hermitian_norm(h.dense());
    const double floor = min_eigenvalue(h.dense() - bound.dense());

    Report rep;
    rep.check_id = "coercivity_bound";
    rep.anchor = "dirichlet.coercivity-lower-bound";
    rep.parameters = {{"dim", x.dim()}, {"lambda", gen.lambda()}, {"eps", eps}, {"delta", delta}};
    rep.add_residual("min_eigenvalue_of_difference", floor);
    rep.add_residual("generator_norm", hnorm);
    rep.tolerance = -1e-9 * std::max(hnorm, 1.0);
    rep.status = verdict(floor >= rep.tolerance);
    return rep;
}

Report minmax_domination_check(const DirichletGenerator& gen)
{
    const SuperOperator h = generator_expanded(gen.x(), gen.lambda());
    const RealVector eh = sorted_eigenvalues(h.dense());
    const RealVector eq = sorted_eigenvalues(q_superop(gen.x(), gen.lambda()).dense());
    const double hnorm = std::max(std::abs(eh[0]), std::abs(eh[eh.size() - 1]));
    double worst = -std::numeric_limits<double>::infinity();
    Index worst_index = 0;
    for (Index i = 0; i < eh.size(); ++i) {
        const double excess = eq[i] - eh[i];
        if (excess > worst) {
            worst = excess;
            worst_index = i;
        }
    }

    Report rep;
    rep.check_id = "minmax_domination";
    rep.anchor = "dirichlet.q-operator-eigenvalue-domination";
    rep.parameters = {{"dim", gen.x().dim()}, {"lambda", gen.lambda()}};
    rep.add_residual("max_excess_q_over_h", worst);
    rep.add_residual("worst_sorted_index", static_cast<double>(worst_index));
    rep.add_residual("generator_norm", hnorm);
    rep.tolerance = 1e-9 * std::max(hnorm, 1.0);
    rep.status = verdict(worst <= rep.tolerance);
    return rep;
}

Report beurling_deny_check(const DirichletGenerator& gen, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    const SuperOperator& h = gen.h();
    double worst = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const HSVector xi = random_hermitian_unit(gen.x().dim(), rng);
        const JordanParts parts = jordan_decompose(xi);
        // E(xi+ | xi-) = (xi+ | H xi-)
        const double cross = hs_inner(parts.plus, h.apply(parts.minus)).real();
        worst = std::max(worst, cross);
    }

    Report rep;
    rep.check_id = "beurling_deny";
    rep.anchor = "dirichlet.first-beurling-deny";
    rep.parameters = {{"dim", gen.x().dim()}, {"lambda", gen.lambda()}, {"samples", samples}, {"seed", seed}};
    rep.add_residual("max_cross_term", samples > 0 ? worst : 0.0);
    rep.tolerance = 1e-10;
    rep.status = verdict(samples == 0 || worst <= rep.tolerance);
    return rep;
}

Report j_reality_check(const DirichletGenerator& gen, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const HSVector xi = random_hermitian_unit(gen.x().dim(), rng);
        const Matrix hx = gen.h().apply(xi.matrix());
        worst = std::max(worst, (hx - hx.adjoint()).norm());
    }
    Report rep;
    rep.check_id = "j_reality";
    rep.anchor = "dirichlet.form-is-j-real";
    rep.parameters = {{"dim", gen.x().dim()}, {"samples", samples}, {"seed", seed}};
    rep.add_residual("max_antihermitian_part", worst);
    rep.add_residual("generator_norm", gen.norm());
    rep.tolerance = 1e-11 * std::max(gen.norm(), 1.0);
    rep.status = verdict(worst <= rep.tolerance);
    return rep;
}

Report conservativeness_check(const AffiliatedOperator& x, double mu, double nu, const StandardFormContext& ctx,
                              double tol)
{
    if (!(mu > 0.0) || !(nu > 0.0)) throw SpecError("conservativeness_check needs mu, nu > 0");
    const HSVector& xi0 = ctx.xi0();
    const double form = form_value(x, mu, nu, xi0);
    const HSVector xxi0(x.matrix * xi0.matrix());
    const HSVector xsxi0(x.matrix.adjoint() * xi0.matrix());
    const double eig_res = (modular_power(0.5, xxi0, ctx) - (mu / nu) * xxi0).norm();
    const double s0_res = (s0_apply(xxi0, ctx) - xsxi0).norm();

    const bool form_side = std::sqrt(form) <= tol;
    const bool modular_side = eig_res <= tol && s0_res <= tol;

    Report rep;
    rep.check_id = "conservativeness";
    rep.anchor = "dirichlet.conservative-iff-modular-eigenvector";
    rep.parameters = {{"dim", x.dim()}, {"mu", mu}, {"nu", nu}, {"mu_over_nu", mu / nu}, {"operator", x.label}};
    rep.add_residual("form_at_xi0", form);
    rep.add_residual("eigenvector_residual", eig_res);
    rep.add_residual("s0_residual", s0_res);
    rep.add_residual("sides_agree", form_side == modular_side ? 1.0 : 0.0);
    rep.tolerance = tol;
    if (form_side != modular_side) {
        rep.status = Status::Fail;
        rep.note = "equivalence violated: form side and modular side disagree";
    } else {
        rep.status = verdict(form_side);
        if (!form_side) rep.note = "not conservative: xi0 is not annihilated and X xi0 is not a matching eigenvector";
    }
    return rep;
}

Report intertwining_check(const AffiliatedOperator& x, double lambda, const StandardFormContext& ctx, int samples,
                          std::uint64_t seed)
{
    Report rep;
    rep.check_id = "intertwining";
    rep.anchor = "dirichlet.derivation-intertwines-commutator";
    rep.parameters = {{"dim", x.dim()}, {"lambda", lambda}, {"samples", samples}, {"seed", seed}};
    rep.tolerance = 1e-10;

    const HSVector xxi0(x.matrix * ctx.xi0().matrix());
    const double pre = (modular_power(0.25, xxi0, ctx) - lambda * xxi0).norm();
    rep.add_residual("eigenvector_precondition", pre);
    if (pre > 1e-8 * std::max(1.0, xxi0.norm())) {
        rep.status = Status::NotApplicable;
        rep.note = "X xi0 is not a Delta^{1/4} eigenvector with this lambda";
        return rep;
    }

    const Matrix& X = x.matrix;
    const Matrix Xs = X.adjoint();
    const Matrix& xi0 = ctx.xi0().matrix();
    std::mt19937_64 rng(seed);
    double d_res = 0.0, ds_res = 0.0, left_res = 0.0, right_res = 0.0, form_res = 0.0;
    for (int s = 0; s < samples; ++s) {
        Matrix y = random_gaussian(x.dim(), rng);
        y /= spectral_norm(y);
        const HSVector iy = embed({y, "y"}, ctx);
        const HSVector lhs = derivation_apply(x, lambda, 1.0 / lambda, iy);
        const HSVector rhs = embed({kI * (X * y - y * X), "i[X,y]"}, ctx);
        d_res = std::max(d_res, (lhs - rhs).norm());

        const HSVector lhs_s = derivation_apply(x.adjoint(), 1.0 / lambda, lambda, iy);
        const HSVector rhs_s = embed({kI * (Xs * y - y * Xs), "i[X*,y]"}, ctx);
        ds_res = std::max(ds_res, (lhs_s - rhs_s).norm());

        const HSVector left = modular_power(0.25, HSVector(X * y * xi0), ctx);
        left_res = std::max(left_res, (left.matrix() - lambda * X * iy.matrix()).norm());
        const HSVector right = modular_power(0.25, HSVector(y * X * xi0), ctx);
        right_res = std::max(right_res, (right.matrix() - iy.matrix() * X / lambda).norm());

        // E[i0(y)] = ||i0([X,y])||^2 + ||i0([X^*,y])||^2
        const double form = form_value(x, lambda, 1.0 / lambda, iy);
        const double comm = rhs.squared_norm() + rhs_s.squared_norm();
        form_res = std::max(form_res, std::abs(form - comm));
    }
    rep.add_residual("derivation_vs_embedded_commutator", d_res);
    rep.add_residual("adjoint_derivation_vs_embedded_commutator", ds_res);
    rep.add_residual("left_representation", left_res);
    rep.add_residual("right_representation", right_res);
    rep.add_residual("form_as_commutator_squares", form_res);
    const double worst = std::max({d_res, ds_res, left_res, right_res, form_res});
    rep.status = verdict(worst <= rep.tolerance);
    return rep;
}

}  // namespace kmsd
