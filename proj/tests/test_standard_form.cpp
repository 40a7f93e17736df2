#include <cmath>
#include <random>

#include <doctest.h>

#include "kmsd/standard_form.hpp"
#include "kmsd/superoperator.hpp"
#include "oracles.hpp"

using namespace kmsd;

namespace {

StandardFormContext make_ctx(int dim, double beta, Profile g = Profile::linear())
{
    return StandardFormContext(gibbs_data({dim, std::move(g), beta}));
}

Matrix rho_pow(const StandardFormContext& ctx, double s)
{
    // direct powers of the weights, not of the log weights
    Matrix out = Matrix::Zero(ctx.dim(), ctx.dim());
    for (Index k = 0; k < ctx.dim(); ++k) out(k, k) = std::pow(ctx.gibbs().weights[k], s);
    return out;
}

}  // namespace

TEST_SUITE("standard_form")
{
    TEST_CASE("modular power is conjugation by rho^s")
    {
        const auto ctx = make_ctx(7, 0.8, Profile::log(2.0));
        std::mt19937_64 rng(3);
        const HSVector xi(oracle::random_matrix(7, rng));
        for (double s : {-1.0, -0.25, 0.0, 0.5, 1.0}) {
            const Matrix expected = rho_pow(ctx, s) * xi.matrix() * rho_pow(ctx, -s);
            CHECK((modular_power(s, xi, ctx).matrix() - expected).norm() < 1e-12 * expected.norm());
        }
        CHECK_THROWS_AS(modular_power(1.5, xi, ctx), SpecError);
    }

    TEST_CASE("modular unitary is unitary and matches rho^{it}")
    {
        const auto ctx = make_ctx(6, 1.3);
        std::mt19937_64 rng(4);
        const HSVector xi(oracle::random_matrix(6, rng));
        const HSVector u = modular_unitary(0.7, xi, ctx);
        CHECK(std::abs(u.norm() - xi.norm()) < 1e-12);
        Matrix rit = Matrix::Zero(6, 6), rmit = Matrix::Zero(6, 6);
        for (int k = 0; k < 6; ++k) {
            rit(k, k) = std::exp(Complex(0.0, 0.7) * std::log(ctx.gibbs().weights[k]));
            rmit(k, k) = std::conj(rit(k, k));
        }
        CHECK((u.matrix() - rit * xi.matrix() * rmit).norm() < 1e-12);
    }

    TEST_CASE("S0 maps x xi0 to x^* xi0")
    {
        const auto ctx = make_ctx(6, 1.0);
        std::mt19937_64 rng(5);
        for (int i = 0; i < 5; ++i) {
            const Matrix x = oracle::random_matrix(6, rng);
            const HSVector v(x * ctx.xi0().matrix());
            const HSVector expected(x.adjoint() * ctx.xi0().matrix());
            CHECK((s0_apply(v, ctx) - expected).norm() < 1e-10 * expected.norm());
        }
    }

    TEST_CASE("embedding round trip and symmetric form")
    {
        const auto ctx = make_ctx(8, 1.0);
        std::mt19937_64 rng(6);
        const Matrix x = oracle::random_matrix(8, rng);
        const HSVector e = embed({x, "x"}, ctx);
        CHECK((e.matrix() - rho_pow(ctx, 0.25) * x * rho_pow(ctx, 0.25)).norm() < 1e-13);
        const Unembedded back = unembed(e, ctx);
        CHECK((back.x.matrix - x).norm() < 1e-10 * x.norm());
        CHECK_FALSE(back.ill_conditioned);
        // i0(x) = Delta^{1/4} x xi0
        const HSVector viaDelta = modular_power(0.25, HSVector(x * ctx.xi0().matrix()), ctx);
        CHECK((viaDelta - e).norm() < 1e-12);
        Matrix bad = x;
        bad(0, 0) = Complex(std::nan(""), 0.0);
        CHECK_THROWS_AS(embed({bad, "bad"}, ctx), SpecError);
    }

    TEST_CASE("j commutes with left multiplication and J is an involution")
    {
        std::mt19937_64 rng(7);
        const Matrix y = oracle::random_matrix(5, rng), z = oracle::random_matrix(5, rng);
        const HSVector xi(oracle::random_matrix(5, rng));
        const HSVector a = j_action({y, "y"}, HSVector(z * xi.matrix()));
        const HSVector b(z * j_action({y, "y"}, xi).matrix());
        CHECK((a - b).norm() < 1e-12);
        CHECK((conj_J(conj_J(xi)) - xi).norm() == 0.0);
        CHECK((j_superop(y).apply(xi) - j_action({y, "y"}, xi)).norm() < 1e-12);
    }

    TEST_CASE("Araki Hamiltonian generates the modular group")
    {
        const auto ctx = make_ctx(5, 0.9, Profile::log(2.0));
        const Matrix k = araki_hamiltonian(ctx).dense();
        std::mt19937_64 rng(8);
        const HSVector xi(oracle::random_matrix(5, rng));
        // Delta^s = exp(-s K); K is diagonal in the vec basis
        const Eigen::VectorXcd v = vec(xi.matrix());
        Eigen::VectorXcd out(v.size());
        for (Index i = 0; i < v.size(); ++i) out[i] = std::exp(-0.5 * k(i, i)) * v[i];
        CHECK((unvec(out, 5) - modular_power(0.5, xi, ctx).matrix()).norm() < 1e-12 * xi.norm());
        CHECK((k - Matrix(k.diagonal().asDiagonal())).norm() == 0.0);
    }

    TEST_CASE("Jordan decomposition")
    {
        std::mt19937_64 rng(9);
        const HSVector xi(oracle::random_hermitian(6, rng));
        const JordanParts p = jordan_decompose(xi);
        CHECK((p.plus - p.minus - xi).norm() < 1e-13);
        CHECK((p.plus.matrix() * p.minus.matrix()).norm() < 1e-13);
        CHECK(in_cone(p.plus));
        CHECK(in_cone(p.minus));
        CHECK(in_cone(p.abs));
        CHECK_THROWS_AS(jordan_decompose(HSVector(oracle::random_matrix(6, rng))), SpecError);
    }

    TEST_CASE("order interval samples lie in [0, xi0]")
    {
        const auto ctx = make_ctx(8, 1.0);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const HSVector s = sample_order_interval(ctx, seed);
            CHECK(in_cone(s));
            CHECK(in_cone(ctx.xi0() - s));
            CHECK((sample_order_interval(ctx, seed) - s).norm() == 0.0);
        }
    }

    TEST_CASE("random unitary")
    {
        std::mt19937_64 rng(10);
        const Matrix u = random_unitary(7, rng);
        CHECK((u.adjoint() * u - Matrix::Identity(7, 7)).norm() < 1e-12);
        const Matrix p = random_psd(7, rng, 0.0, 1.0);
        CHECK(min_eigenvalue(p) >= -1e-12);
        CHECK(min_eigenvalue(Matrix::Identity(7, 7) - p) >= -1e-12);
    }

    TEST_CASE("conditioning failures are reported")
    {
        const auto ctx = make_ctx(40, 50.0);
        const HSVector xi(Matrix::Ones(40, 40));
        CHECK_THROWS_AS(modular_power(0.5, xi, ctx), ConditioningError);
        CHECK_THROWS_AS(ctx.rho_power(-1.0), ConditioningError);
        CHECK(unembed(xi, ctx).ill_conditioned);
        CHECK_THROWS_AS(make_ctx(60, 60.0), ConditioningError);
    }

    TEST_CASE("inner product")
    {
        std::mt19937_64 rng(11);
        const HSVector a(oracle::random_matrix(4, rng)), b(oracle::random_matrix(4, rng));
        CHECK(std::abs(hs_inner(a, b) - vec(a.matrix()).dot(vec(b.matrix()))) < 1e-12);
        CHECK(std::abs(hs_inner(a, a).real() - a.squared_norm()) < 1e-12);
    }
}

TEST_SUITE("superoperator")
{
    TEST_CASE("dense realization matches kron and apply")
    {
        std::mt19937_64 rng(12);
        const Matrix l = oracle::random_matrix(4, rng), r = oracle::random_matrix(4, rng);
        const Matrix l2 = oracle::random_matrix(4, rng), r2 = oracle::random_matrix(4, rng);
        const SuperOperator s = SuperOperator::sandwich(l, r) + Complex(0.0, 2.0) * SuperOperator::sandwich(l2, r2);
        const Matrix expected = oracle::sandwich(l, r) + Complex(0.0, 2.0) * oracle::sandwich(l2, r2);
        CHECK((s.dense() - expected).norm() < 1e-12);
        const Matrix xi = oracle::random_matrix(4, rng);
        CHECK((unvec(s.dense() * vec(xi), 4) - s.apply(xi)).norm() < 1e-12);
        CHECK((s.adjoint().dense() - s.dense().adjoint()).norm() < 1e-12);
    }

    TEST_CASE("composition and subtraction")
    {
        std::mt19937_64 rng(13);
        const SuperOperator a = SuperOperator::sandwich(oracle::random_matrix(3, rng), oracle::random_matrix(3, rng));
        const SuperOperator b = SuperOperator::left(oracle::random_matrix(3, rng)) +
                                SuperOperator::right(oracle::random_matrix(3, rng));
        CHECK(((a * b).dense() - a.dense() * b.dense()).norm() < 1e-11);
        CHECK((a - a).dense().norm() < 1e-14);
        CHECK((SuperOperator::identity(3).dense() - Matrix::Identity(9, 9)).norm() == 0.0);
        CHECK(SuperOperator::zero(3).dense().norm() == 0.0);
        CHECK_THROWS_AS(SuperOperator::identity(3) + SuperOperator::identity(4), SpecError);
    }

    TEST_CASE("vec is column stacking")
    {
        Matrix m(2, 2);
        m << 1.0, 2.0, 3.0, 4.0;
        const Eigen::VectorXcd v = vec(m);
        CHECK(v[1] == Complex(3.0));
        CHECK(v[2] == Complex(2.0));
        CHECK((unvec(v, 2) - m).norm() == 0.0);
        CHECK(spectral_norm(m) == doctest::Approx(5.4649857042).epsilon(1e-9));
    }
}
