#include <cmath>
#include <random>

#include <doctest.h>

#include "kmsd/deformation.hpp"
#include "oracles.hpp"

using namespace kmsd;

namespace {

// ln(e - 1 + cosh x) without overflow
double log_e_cosh(double x)
{
    x = std::abs(x);
    if (x < 20.0) return std::log(std::exp(1.0) - 1.0 + std::cosh(x));
    return x - std::log(2.0) + std::log1p(2.0 * (std::exp(1.0) - 1.0) * std::exp(-x) + std::exp(-2.0 * x));
}

// plain trapezoid on [-L, L]; the tail beyond L is below 1e-9 for r = 3
Complex logcosh_hat_oracle(double b, double r, double s)
{
    const double pi = std::acos(-1.0);
    const double L = 200.0, h = 1e-3;
    const long n = static_cast<long>(2 * L / h);
    Complex acc(0.0);
    for (long i = 0; i <= n; ++i) {
        const double t = -L + i * h;
        const double w = (i == 0 || i == n) ? 0.5 * h : h;
        acc += w * std::polar(1.0, (b + s) * t) / std::pow(log_e_cosh(8.0 * pi * t), r);
    }
    return acc;
}

double operator_error(const FunctionSpec& f, const FockSpec& spec, QuadratureSpec q)
{
    return (quadrature_operator(f, spec, q).matrix - deformed_operator(f, spec).matrix).norm();
}

}  // namespace

TEST_SUITE("deformation")
{
    TEST_CASE("closed-form Fourier transform of the cosh window")
    {
        const auto f = FunctionSpec::cosh(0.0);
        CHECK(std::abs(fourier_hat_closed(f, 0.0) - 0.125) < 1e-15);
        CHECK(std::abs(fourier_hat_closed(f, 16.0) - 0.0810068) < 1e-7);
        CHECK(std::abs(fourier_hat_closed(FunctionSpec::cosh(3.0), 13.0) - fourier_hat_closed(f, 16.0)) < 1e-15);
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> u(-40.0, 40.0);
        for (int i = 0; i < 20; ++i) {
            const double s = u(rng);
            const auto g = FunctionSpec::cosh(0.7);
            const Complex exact = fourier_hat_closed(g, s);
            CHECK(std::abs(fourier_hat(g, s) - exact) <= 1e-9 * std::abs(exact));
            QuadratureSpec gauss;
            gauss.rule = QuadratureSpec::Rule::Gauss;
            CHECK(std::abs(fourier_hat(g, s, gauss) - exact) <= 1e-6 * std::abs(exact));
        }
        CHECK_THROWS_AS(fourier_hat_closed(FunctionSpec::logcosh(0.0, 2.0), 0.0), SpecError);
    }

    TEST_CASE("logcosh family")
    {
        CHECK_THROWS_AS(FunctionSpec::logcosh(0.0, 1.0), SpecError);
        CHECK_THROWS_AS(FunctionSpec::logcosh(0.0, 0.5), SpecError);
        const auto f = FunctionSpec::logcosh(0.5, 3.0);
        CHECK(std::abs(f(0.0) - 1.0) < 1e-15);
        for (double s : {0.0, 1.5, 5.0}) {
            const Complex ref = logcosh_hat_oracle(0.5, 3.0, s);
            CHECK(std::abs(fourier_hat(f, s) - ref) < 1e-6 * std::abs(logcosh_hat_oracle(0.5, 3.0, -0.5)));
        }
        // at s = -b the integrand is real and positive
        const Complex at_zero = fourier_hat(f, -0.5);
        CHECK(at_zero.real() > 0.0);
        CHECK(std::abs(at_zero.imag()) < 1e-9);
        CHECK(f.lambda_target().value() == doctest::Approx(std::exp(-0.125)));
    }

    TEST_CASE("function tables")
    {
        CHECK_THROWS_AS(FunctionSpec::table({0.0, 1.0}, {Complex(1.0)}), SpecError);
        CHECK_THROWS_AS(FunctionSpec::table({0.0}, {Complex(1.0)}), SpecError);
        CHECK_THROWS_AS(FunctionSpec::table({1.0, 0.0}, {Complex(1.0), Complex(1.0)}), SpecError);
        // table of the cosh window reproduces its transform
        std::vector<double> t;
        std::vector<Complex> v;
        const double pi = std::acos(-1.0);
        for (int i = 0; i <= 4000; ++i) {
            t.push_back(-2.0 + i * 1e-3);
            v.push_back(1.0 / std::cosh(8.0 * pi * t.back()));
        }
        const auto f = FunctionSpec::table(t, v);
        CHECK_FALSE(f.lambda_target().has_value());
        CHECK(std::abs(fourier_hat(f, 3.0) - fourier_hat_closed(FunctionSpec::cosh(0.0), 3.0)) < 1e-9);
    }

    TEST_CASE("deformed annihilator")
    {
        const double beta = 1.2;
        const FockSpec lin{8, Profile::linear(), beta};
        const auto f = FunctionSpec::cosh(0.4);
        const Matrix a = ladder(lin).annihilation.matrix;
        const Matrix x = deformed_operator(f, lin).matrix;
        CHECK((x - fourier_hat_closed(f, beta) * a).norm() < 1e-14);

        const FockSpec lg{8, Profile::log(2.0), beta};
        const Matrix y = deformed_operator(f, lg).matrix;
        for (int k = 1; k < 8; ++k) {
            const double gap = beta * (std::log(k + 2.0) - std::log(k + 1.0));
            CHECK(std::abs(y(k - 1, k) - std::sqrt(k) / (8.0 * std::cosh((gap + 0.4) / 16.0))) < 1e-14);
        }
        const Matrix z = deformed_operator(FunctionSpec::cosh(0.0), lg).matrix;
        for (int k = 1; k < 8; ++k) {
            CHECK(z(k - 1, k).real() > 0.0);
            CHECK(z(k - 1, k).imag() == 0.0);
        }
        const auto m = deformation_multipliers(f, lg);
        CHECK(m.size() == 8u);
        CHECK(std::abs(m[0] - fourier_hat_closed(f, 0.0)) < 1e-9);
    }

    TEST_CASE("quadrature against the functional calculus")
    {
        const FockSpec spec{10, Profile::log(2.0), 1.0};
        const auto f = FunctionSpec::cosh(0.3);
        const Report r = quadrature_crosscheck(f, spec, {}, 20, 4);
        CHECK(r.passed());
        CHECK(r.residual("operator_difference") <= 1e-6);
        QuadratureSpec q;
        q.nodes = 64;
        const double e64 = operator_error(f, spec, q);
        q.nodes = 128;
        const double e128 = operator_error(f, spec, q);
        q.nodes = 512;
        const double e512 = operator_error(f, spec, q);
        CHECK(e128 < e64);
        CHECK(e512 < 1e-9);
        q.rule = QuadratureSpec::Rule::Gauss;
        q.nodes = 1024;
        CHECK(operator_error(f, spec, q) < 1e-6);
        QuadratureSpec shortq;
        shortq.half_width = 0.1;
        CHECK_THROWS_AS(quadrature_operator(f, spec, shortq), SpecError);
        QuadratureSpec few;
        few.nodes = 10;
        CHECK_THROWS_AS(few.validate(), SpecError);
        CHECK_THROWS_AS(quadrature_crosscheck(FunctionSpec::logcosh(0.0, 2.0), spec, {}, 3, 1), SpecError);
    }

    TEST_CASE("modular eigenvector: the true eigenvalue")
    {
        const double beta = 1.0;
        const auto f = FunctionSpec::cosh(1.0);
        const FockSpec lin{10, Profile::linear(), beta};
        const StandardFormContext cl(gibbs_data(lin));
        const AffiliatedOperator x = deformed_operator(f, lin);
        // X xi0 is proportional to A xi0, which Delta^{1/4} scales by exp(beta/4)
        const Report ok = modular_eigenvector_check(x, cl, std::exp(beta / 4.0));
        CHECK(ok.passed());
        CHECK(ok.residual("rayleigh_eigenvalue") == doctest::Approx(std::exp(beta / 4.0)).epsilon(1e-12));
        const Report target = modular_eigenvector_check(x, cl, *f.lambda_target());
        CHECK(target.status == Status::Fail);
        CHECK(target.residual("relative_residual_at_rayleigh") < 1e-12);

        const FockSpec lg{10, Profile::log(2.0), beta};
        const StandardFormContext cg(gibbs_data(lg));
        const Report no = modular_eigenvector_check(deformed_operator(f, lg), cg, *f.lambda_target());
        CHECK(no.status == Status::Fail);
        CHECK(no.residual("relative_residual_at_rayleigh") > 1e-3);
        CHECK_FALSE(no.note.empty());
    }

    TEST_CASE("deformed commutation relations")
    {
        const FockSpec spec{12, Profile::log(2.0), 2.0};
        for (const auto& f : {FunctionSpec::cosh(0.0), FunctionSpec::cosh(2.5)}) {
            const AffiliatedOperator x = deformed_operator(f, spec);
            const Report r = ccr_relations_check(x, f, spec);
            CHECK(r.passed());
        }
        CHECK_THROWS_AS(
            ccr_relations_check(deformed_operator(FunctionSpec::cosh(0.0), {5, Profile::linear(), 1.0}),
                                FunctionSpec::cosh(0.0), spec),
            SpecError);
    }

    TEST_CASE("hyperbolic commutator")
    {
        const Report r = hyperbolic_commutator_check({14, Profile::linear(), 1.0});
        CHECK(r.passed());
        CHECK(r.residual("value_at_k0") == doctest::Approx(2.0));
        CHECK(r.residual("value_at_k3") == doctest::Approx(14.0));
        CHECK_THROWS_AS(hyperbolic_commutator_check({4, Profile::linear(), 1.0}), SpecError);
    }

    TEST_CASE("asymptotics of X^*X")
    {
        const auto f = FunctionSpec::cosh(0.0);
        const Report lin = ccr_trend_check(f, {40, Profile::log(2.0), 1.0});
        CHECK(lin.passed());
        CHECK(lin.parameters["regime"] == "linear");
        CHECK(lin.residual("limit_at_zero_gap") == doctest::Approx(1.0 / 64.0));

        std::vector<double> sq;
        for (int k = 0; k < 20; ++k) sq.push_back(static_cast<double>(k) * k);
        const Report van = ccr_trend_check(f, {20, Profile::table(sq), 1.0});
        CHECK(van.passed());
        CHECK(van.parameters["regime"] == "vanishing");
        CHECK(van.residual("ratio_last") < van.residual("ratio_first"));
        CHECK_THROWS_AS(ccr_trend_check(f, {8, Profile::linear(), 1.0}), SpecError);
    }
}
