#include <cmath>

#include <doctest.h>

#include "kmsd/fock.hpp"
#include "oracles.hpp"

using namespace kmsd;

TEST_SUITE("fock")
{
    TEST_CASE("three-level ladder")
    {
        FockSpec spec{3, Profile::linear(), 1.0};
        const Matrix a = ladder(spec).annihilation.matrix;
        CHECK(a(0, 1) == Complex(1.0));
        CHECK(std::abs(a(1, 2) - std::sqrt(2.0)) < 1e-15);
        CHECK(a.col(0).norm() == 0.0);
        CHECK((ladder(spec).creation.matrix - a.adjoint()).norm() == 0.0);
    }

    TEST_CASE("number operator and boundary of AA*")
    {
        FockSpec spec{8, Profile::linear(), 1.0};
        const auto [a, adag] = ladder(spec);
        const Matrix n = adag.matrix * a.matrix;
        const Matrix aad = a.matrix * adag.matrix;
        for (int k = 0; k < 8; ++k) {
            CHECK(n(k, k).real() == doctest::Approx(k).epsilon(1e-15));
            if (k <= 6) CHECK(aad(k, k).real() == doctest::Approx(k + 1).epsilon(1e-15));
        }
        CHECK(aad(7, 7) == Complex(0.0));
        CHECK((n - number_operator(spec).matrix).norm() < 1e-14);
    }

    TEST_CASE("truncated weights approach the geometric distribution")
    {
        FockSpec spec{30, Profile::linear(), std::log(2.0)};
        const GibbsData g = gibbs_data(spec);
        for (int k = 0; k <= 20; ++k) CHECK(std::abs(g.weights[k] - std::pow(2.0, -(k + 1))) < 1e-8);
        const RealVector w = analytic_linear_weights(std::log(2.0), 30);
        CHECK(std::abs(w[0] - 0.5) < 1e-15);
    }

    TEST_CASE("two-level normalization")
    {
        const double beta = 0.7;
        const GibbsData g = gibbs_data({2, Profile::linear(), beta});
        const double z = 1.0 + std::exp(-beta);
        CHECK(g.weights[0] == doctest::Approx(1.0 / z).epsilon(1e-15));
        CHECK(g.weights[1] == doctest::Approx(std::exp(-beta) / z).epsilon(1e-15));
    }

    TEST_CASE("log profile weights sum to one and match direct summation")
    {
        FockSpec spec{64, Profile::log(2.0), 3.0};
        const GibbsData g = gibbs_data(spec);
        CHECK(std::abs(g.weights.sum() - 1.0) < 1e-14);
        std::vector<double> vals;
        for (int k = 0; k < 64; ++k) vals.push_back(std::log(k + 2.0));
        const RealVector w = oracle::gibbs(vals, 3.0);
        CHECK((g.weights - w).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((g.xi0.matrix() * g.xi0.matrix() - g.rho.matrix()).norm() < 1e-15);
        CHECK((g.weights.array() > 0.0).all());
    }

    TEST_CASE("large beta*g stays normalized")
    {
        const GibbsData g = gibbs_data({20, Profile::linear(), 200.0});
        CHECK(std::abs(g.weights.sum() - 1.0) < 1e-14);
        CHECK(std::isfinite(g.log_weights[19]));
    }

    TEST_CASE("invalid specs are rejected")
    {
        CHECK_THROWS_AS(gibbs_data({1, Profile::linear(), 1.0}), SpecError);
        CHECK_THROWS_AS(gibbs_data({4, Profile::linear(), 0.0}), SpecError);
        CHECK_THROWS_AS(gibbs_data({4, Profile::table({0.0, 1.0, 0.5, 2.0}), 1.0}), SpecError);
        CHECK_THROWS_AS(gibbs_data({5, Profile::table({0.0, 1.0}), 1.0}), SpecError);
        CHECK_THROWS_AS(Profile::log(1.5), SpecError);
        CHECK_THROWS_AS(ladder_power({4, Profile::linear(), 1.0}, 4), SpecError);
        CHECK_THROWS_AS(ladder_power({4, Profile::linear(), 1.0}, 0), SpecError);
    }

    TEST_CASE("g(-1) is g(0)")
    {
        CHECK(Profile::log(3.0)(-1) == doctest::Approx(std::log(3.0)));
        CHECK(Profile::linear()(-1) == 0.0);
    }

    TEST_CASE("ladder power products")
    {
        for (int m = 1; m <= 3; ++m) {
            FockSpec spec{10, Profile::linear(), 1.0};
            const Report r = product_identity_check(spec, m);
            CHECK(r.passed());
            CHECK(r.boundary_indices.size() == static_cast<std::size_t>(m));
            CHECK(r.boundary_indices.front() == 10 - m);
        }
        // X_2^* X_2 on e_0 is 1*2
        const Matrix x = ladder_power({6, Profile::linear(), 1.0}, 2).matrix;
        CHECK(std::abs((x.adjoint() * x)(0, 0) - 2.0) < 1e-14);
    }
}
