#include <cmath>
#include <random>

#include <doctest.h>

#include "kmsd/dirichlet.hpp"
#include "oracles.hpp"

using namespace kmsd;

namespace {

StandardFormContext make_ctx(int dim, double beta = 1.0, Profile g = Profile::linear())
{
    return StandardFormContext(gibbs_data({dim, std::move(g), beta}));
}

}  // namespace

TEST_SUITE("dirichlet")
{
    TEST_CASE("generator assemblies agree with the kron oracle")
    {
        std::mt19937_64 rng(21);
        for (double lambda : {0.5, 1.0, 2.0}) {
            const AffiliatedOperator x{oracle::random_matrix(6, rng), "random"};
            const Matrix ref = oracle::generator(x.matrix, lambda);
            CHECK((generator_expanded(x, lambda).dense() - ref).norm() < 1e-11 * ref.norm());
            CHECK((generator_direct(x, lambda).dense() - ref).norm() < 1e-11 * ref.norm());
            CHECK(generator_identity_check(x, lambda).passed());
        }
    }

    TEST_CASE("form value is the quadratic form of the generator")
    {
        const auto ctx = make_ctx(5);
        std::mt19937_64 rng(22);
        const AffiliatedOperator x{oracle::random_matrix(5, rng), "random"};
        const DirichletGenerator gen(x, 0.6, 1.7, ctx);
        CHECK(gen.lambda() == doctest::Approx(std::sqrt(0.6 / 1.7)));
        for (int i = 0; i < 5; ++i) {
            const HSVector xi(oracle::random_matrix(5, rng));
            const double e = form_value(x, 0.6, 1.7, xi);
            const Complex q = hs_inner(xi, gen.h().apply(xi));
            CHECK(std::abs(q.imag()) < 1e-10 * e);
            CHECK(std::abs(q.real() - e) < 1e-10 * e);
        }
    }

    TEST_CASE("expanded form agrees on Hermitian vectors")
    {
        std::mt19937_64 rng(23);
        const AffiliatedOperator x{oracle::random_matrix(6, rng), "random"};
        for (double lambda : {0.4, 1.0, 1.9}) {
            const HSVector xi(oracle::random_hermitian(6, rng));
            const double a = form_value(x, lambda, 1.0 / lambda, xi);
            CHECK(std::abs(form_value_expanded(x, lambda, xi) - a) < 1e-11 * std::max(1.0, a));
        }
    }

    TEST_CASE("two forms of Q")
    {
        std::mt19937_64 rng(24);
        const AffiliatedOperator x{oracle::random_matrix(6, rng), "random"};
        const Matrix a = q_operator(x, 0.7).matrix;
        CHECK((a - q_operator_commutator_form(x, 0.7).matrix).norm() < 1e-12 * a.norm());
        CHECK((q_superop(x, 0.7).dense() - oracle::sandwich(a, Matrix::Identity(6, 6)) -
               oracle::sandwich(Matrix::Identity(6, 6), a))
                  .norm() < 1e-12 * a.norm());
    }

    TEST_CASE("coercivity certificates on random operators")
    {
        const auto ctx = make_ctx(6);
        std::mt19937_64 rng(25);
        for (double lambda : {0.5, 1.0, 2.0}) {
            const auto gen = DirichletGenerator::from_lambda({oracle::random_matrix(6, rng), "random"}, lambda, ctx);
            CHECK(coercivity_identity_check(gen).passed());
            CHECK(coercivity_bound_check(gen, 1.0, 1.0).passed());
            CHECK(coercivity_bound_check(gen, 0.7, 1.3).passed());
            CHECK(minmax_domination_check(gen).passed());
        }
        const auto gen = DirichletGenerator::from_lambda({oracle::random_matrix(6, rng), "random"}, 1.0, ctx);
        CHECK_THROWS_AS(coercivity_bound_check(gen, 0.0, 1.0), SpecError);
    }

    TEST_CASE("Beurling-Deny and J-reality")
    {
        const auto ctx = make_ctx(6);
        std::mt19937_64 rng(26);
        const auto gen = DirichletGenerator::from_lambda({oracle::random_matrix(6, rng), "random"}, 0.8, ctx);
        const Report bd = beurling_deny_check(gen, 30, 1);
        CHECK(bd.passed());
        CHECK(bd.residual("max_cross_term") <= 1e-10);
        CHECK(j_reality_check(gen, 10, 2).passed());
    }

    TEST_CASE("ladder generator is conservative exactly at the matched lambda")
    {
        const double beta = 1.0;
        const auto ctx = make_ctx(8, beta);
        const FockSpec spec{8, Profile::linear(), beta};
        for (int m = 1; m <= 2; ++m) {
            const AffiliatedOperator x = ladder_power(spec, m);
            const double lambda = std::exp(-m * beta / 4.0);
            const Report ok = conservativeness_check(x, lambda, 1.0 / lambda, ctx);
            CHECK(ok.passed());
            const auto gen = DirichletGenerator::from_lambda(x, lambda, ctx);
            CHECK(gen.h().apply(ctx.xi0()).norm() <= 1e-11);

            const double off = 1.1 * lambda;
            const Report bad = conservativeness_check(x, off, 1.0 / off, ctx);
            CHECK(bad.status == Status::Fail);
            CHECK(bad.residual("form_at_xi0") > 1e-4);
            CHECK(bad.residual("sides_agree") == 1.0);
        }
    }

    TEST_CASE("intertwining for the ladder operator and not applicable otherwise")
    {
        const auto ctx = make_ctx(7);
        const AffiliatedOperator x = ladder_power({7, Profile::linear(), 1.0}, 1);
        const Report r = intertwining_check(x, std::exp(-0.25), ctx, 5, 3);
        CHECK(r.passed());
        std::mt19937_64 rng(27);
        const Report na = intertwining_check({oracle::random_matrix(7, rng), "random"}, 1.0, ctx, 5, 3);
        CHECK(na.status == Status::NotApplicable);
    }

    TEST_CASE("derivation superoperator")
    {
        std::mt19937_64 rng(28);
        const AffiliatedOperator x{oracle::random_matrix(4, rng), "random"};
        const HSVector xi(oracle::random_matrix(4, rng));
        CHECK((derivation(x.matrix, 0.3, 2.0).apply(xi) - derivation_apply(x, 0.3, 2.0, xi)).norm() < 1e-12);
    }

    TEST_CASE("invalid parameters")
    {
        const auto ctx = make_ctx(4);
        const AffiliatedOperator x = ladder_power({4, Profile::linear(), 1.0}, 1);
        CHECK_THROWS_AS(DirichletGenerator(x, 0.0, 1.0, ctx), SpecError);
        CHECK_THROWS_AS(DirichletGenerator::from_lambda(x, -1.0, ctx), SpecError);
        CHECK_THROWS_AS(DirichletGenerator(ladder_power({5, Profile::linear(), 1.0}, 1), 1.0, 1.0, ctx), SpecError);
    }
}
