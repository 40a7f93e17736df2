#include "kmsd/standard_form.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace kmsd {

namespace {

// exp overflows a little above 709.78
constexpr double kMaxLogFactor = 700.0;

void require_same_dim(const HSVector& a, Index dim, const char* what)
{
    if (a.dim() != dim || a.matrix().cols() != dim)
        throw SpecError(std::string(what) + ": dimension mismatch");
}

}  // namespace

StandardFormContext::StandardFormContext(GibbsData gibbs) : gibbs_(std::move(gibbs))
{
    quarter_ = (0.25 * gibbs_.log_weights.array()).exp();
    const double worst = -0.25 * gibbs_.log_weights.minCoeff();
    if (worst > kMaxLogFactor)
        throw ConditioningError("w^{-1/4} overflows at this truncation (log factor " + std::to_string(worst) + ")");
    inverse_quarter_ = (-0.25 * gibbs_.log_weights.array()).exp();
}

Matrix StandardFormContext::rho_power(double s) const
{
    const Index d = dim();
    Matrix out = Matrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
        const double e = s * gibbs_.log_weights[k];
        if (e > kMaxLogFactor)
            throw ConditioningError("rho^" + std::to_string(s) + " overflows at index " + std::to_string(k));
        out(k, k) = std::exp(e);
    }
    return out;
}

Complex hs_inner(const HSVector& xi, const HSVector& eta)
{
    if (xi.dim() != eta.dim()) throw SpecError("hs_inner: dimension mismatch");
    return (xi.matrix().adjoint() * eta.matrix()).trace();
}

HSVector embed(const AffiliatedOperator& x, const StandardFormContext& ctx)
{
    if (x.dim() != ctx.dim()) throw SpecError("embed: dimension mismatch");
    if (!x.matrix.allFinite()) throw SpecError("embed: operator has non-finite entries");
    const RealVector& q = ctx.quarter();
    return HSVector(q.asDiagonal() * x.matrix * q.asDiagonal());
}

Unembedded unembed(const HSVector& xi, const StandardFormContext& ctx)
{
    require_same_dim(xi, ctx.dim(), "unembed");
    const RealVector& q = ctx.inverse_quarter();
    Unembedded out;
    out.max_factor = q.maxCoeff();
    out.ill_conditioned = out.max_factor > kInverseQuarterWarning;
    out.x = {q.asDiagonal() * xi.matrix() * q.asDiagonal(), "unembedded"};
    return out;
}

HSVector modular_power(double s, const HSVector& xi, const StandardFormContext& ctx)
{
    if (!(std::abs(s) <= 1.0)) throw SpecError("modular_power requires |s| <= 1");
    require_same_dim(xi, ctx.dim(), "modular_power");
    const Index d = ctx.dim();
    const RealVector& lw = ctx.log_weights();
    Matrix out(d, d);
    for (Index k = 0; k < d; ++k) {
        for (Index j = 0; j < d; ++j) {
            const double e = s * (lw[j] - lw[k]);
            if (e > kMaxLogFactor) {
                throw ConditioningError("modular factor overflows at (" + std::to_string(j) + ", " +
                                        std::to_string(k) + ")");
            }
            out(j, k) = std::exp(e) * xi.matrix()(j, k);
        }
    }
    return HSVector(std::move(out));
}

HSVector modular_unitary(double t, const HSVector& xi, const StandardFormContext& ctx)
{
    require_same_dim(xi, ctx.dim(), "modular_unitary");
    const Index d = ctx.dim();
    const RealVector& lw = ctx.log_weights();
    Matrix out(d, d);
    for (Index k = 0; k < d; ++k) {
        for (Index j = 0; j < d; ++j) out(j, k) = std::polar(1.0, t * (lw[j] - lw[k])) * xi.matrix()(j, k);
    }
    return HSVector(std::move(out));
}

HSVector conj_J(const HSVector& xi)
{
    return xi.adjoint();
}

HSVector s0_apply(const HSVector& xi, const StandardFormContext& ctx)
{
    return conj_J(modular_power(0.5, xi, ctx));
}

HSVector j_action(const AffiliatedOperator& y, const HSVector& xi)
{
    if (y.dim() != xi.dim()) throw SpecError("j_action: dimension mismatch");
    return HSVector(xi.matrix() * y.matrix.adjoint());
}

SuperOperator j_superop(const Matrix& y)
{
    return SuperOperator::right(y.adjoint());
}

SuperOperator araki_hamiltonian(const StandardFormContext& ctx)
{
    const Matrix h = ctx.gibbs().spec.beta * profile_operator(ctx.gibbs().spec).matrix;
    return SuperOperator::left(h) - SuperOperator::right(h);
}

bool is_j_real(const HSVector& xi, double tol)
{
    return (xi.matrix() - xi.matrix().adjoint()).norm() <= tol * std::max(1.0, xi.norm());
}

bool in_cone(const HSVector& xi, double tol)
{
    return is_j_real(xi) && min_eigenvalue(xi.matrix()) >= -tol;
}

JordanParts jordan_decompose(const HSVector& xi)
{
    if ((xi.matrix() - xi.matrix().adjoint()).norm() > kHermitianTolerance * std::max(1.0, xi.norm()))
        throw SpecError("jordan_decompose: input is not Hermitian");
    const Matrix h = 0.5 * (xi.matrix() + xi.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RealVector& ev = es.eigenvalues();
    const Matrix& v = es.eigenvectors();
    const RealVector pos = ev.cwiseMax(0.0);
    const RealVector neg = (-ev).cwiseMax(0.0);
    JordanParts out;
    out.plus = HSVector(v * pos.asDiagonal() * v.adjoint());
    out.minus = HSVector(v * neg.asDiagonal() * v.adjoint());
    out.abs = out.plus + out.minus;
    return out;
}

Matrix random_gaussian(Index dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix g(dim, dim);
    for (Index k = 0; k < dim; ++k) {
        for (Index j = 0; j < dim; ++j) {
            const double re = n(rng);
            const double im = n(rng);
            g(j, k) = Complex(re, im);
        }
    }
    return g;
}

Matrix random_unitary(Index dim, std::mt19937_64& rng)
{
    const Matrix g = random_gaussian(dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < dim; ++k) {
        const Complex d = r(k, k);
        const double a = std::abs(d);
        if (a > 0.0) q.col(k) *= d / a;
    }
    return q;
}

HSVector random_hermitian_unit(Index dim, std::mt19937_64& rng)
{
    const Matrix g = random_gaussian(dim, rng);
    Matrix h = 0.5 * (g + g.adjoint());
    h /= h.norm();
    return HSVector(std::move(h));
}

Matrix random_psd(Index dim, std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    const Matrix q = random_unitary(dim, rng);
    RealVector ev(dim);
    for (Index k = 0; k < dim; ++k) ev[k] = u(rng);
    Matrix c = q * ev.asDiagonal() * q.adjoint();
    return 0.5 * (c + c.adjoint());
}

HSVector order_interval_image(const StandardFormContext& ctx, const Matrix& c)
{
    return embed({c, "order interval"}, ctx);
}

HSVector sample_order_interval(const StandardFormContext& ctx, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return order_interval_image(ctx, random_psd(ctx.dim(), rng, 0.0, 1.0));
}

}  // namespace kmsd
