#include "kmsd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

namespace kmsd {

Profile Profile::log(double offset)
{
    if (!(offset >= 2.0)) throw SpecError("log profile requires offset >= 2");
    return Profile(Log{offset});
}

Profile Profile::table(std::vector<double> values)
{
    if (values.empty()) throw SpecError("table profile needs at least one value");
    for (double v : values) {
        if (!std::isfinite(v)) throw SpecError("table profile contains a non-finite value");
    }
    return Profile(Table{std::move(values)});
}

double Profile::operator()(int k) const
{
    if (k < -1) throw SpecError("profile evaluated below -1");
    if (k == -1) k = 0;
    return std::visit(
        [k](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return static_cast<double>(k);
            } else if constexpr (std::is_same_v<T, Log>) {
                return std::log(static_cast<double>(k) + p.offset);
            } else {
                if (k >= static_cast<int>(p.values.size()))
                    throw SpecError("table profile has no value at index " + std::to_string(k));
                return p.values[static_cast<std::size_t>(k)];
            }
        },
        v_);
}

int Profile::max_index() const
{
    if (const auto* t = std::get_if<Table>(&v_)) return static_cast<int>(t->values.size()) - 1;
    return std::numeric_limits<int>::max();
}

const char* Profile::kind() const
{
    switch (v_.index()) {
    case 0: return "linear";
    case 1: return "log";
    default: return "table";
    }
}

void FockSpec::validate() const
{
    if (dim < 2) throw SpecError("fock dim must be >= 2, got " + std::to_string(dim));
    if (!(beta > 0.0) || !std::isfinite(beta)) throw SpecError("beta must be a positive finite number");
    if (g.max_index() < dim - 1) throw SpecError("profile table shorter than dim");
    for (int k = 1; k < dim; ++k) {
        if (g(k) < g(k - 1)) {
            throw SpecError("profile must be monotone increasing; g(" + std::to_string(k) + ") < g(" +
                            std::to_string(k - 1) + ")");
        }
    }
}

GibbsData gibbs_data(const FockSpec& spec)
{
    spec.validate();
    const int d = spec.dim;
    RealVector exponent(d);
    for (int k = 0; k < d; ++k) exponent[k] = -spec.beta * spec.g(k);

    // log-sum-exp so that beta*g up to a few hundred stays representable
    const double top = exponent.maxCoeff();
    const double log_z = top + std::log((exponent.array() - top).exp().sum());

    GibbsData out;
    out.spec = spec;
    out.log_z = log_z;
    out.log_weights = exponent.array() - log_z;
    out.weights = out.log_weights.array().exp();
    // one more pass to absorb the rounding of the exponentials
    out.weights /= out.weights.sum();

    Matrix xi0 = Matrix::Zero(d, d);
    Matrix rho = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        xi0(k, k) = std::exp(0.5 * out.log_weights[k]);
        rho(k, k) = out.weights[k];
    }
    out.xi0 = HSVector(std::move(xi0));
    out.rho = HSVector(std::move(rho));
    return out;
}

RealVector analytic_linear_weights(double beta, int dim)
{
    RealVector w(dim);
    const double norm = -std::expm1(-beta);
    for (int k = 0; k < dim; ++k) w[k] = norm * std::exp(-beta * k);
    return w;
}

LadderPair ladder(const FockSpec& spec)
{
    if (spec.dim < 2) throw SpecError("ladder operators need dim >= 2");
    const int d = spec.dim;
    Matrix a = Matrix::Zero(d, d);
    for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    Matrix adag = a.adjoint();
    return {{std::move(a), "annihilation"}, {std::move(adag), "creation"}};
}

AffiliatedOperator number_operator(const FockSpec& spec)
{
    Matrix n = Matrix::Zero(spec.dim, spec.dim);
    for (int k = 0; k < spec.dim; ++k) n(k, k) = static_cast<double>(k);
    return {std::move(n), "number"};
}

AffiliatedOperator profile_operator(const FockSpec& spec)
{
    Matrix gn = Matrix::Zero(spec.dim, spec.dim);
    for (int k = 0; k < spec.dim; ++k) gn(k, k) = spec.g(k);
    return {std::move(gn), std::string("profile ") + spec.g.kind()};
}

AffiliatedOperator ladder_power(const FockSpec& spec, int m)
{
    if (m < 1) throw SpecError("ladder power must be >= 1");
    if (m >= spec.dim)
        throw SpecError("ladder power m=" + std::to_string(m) + " >= dim truncates to the zero matrix");
    const Matrix adag = ladder(spec).creation.matrix;
    Matrix x = adag;
    for (int i = 1; i < m; ++i) x = x * adag;
    return {std::move(x), "ladder_power " + std::to_string(m)};
}

Report product_identity_check(const FockSpec& spec, int m)
{
    const AffiliatedOperator x = ladder_power(spec, m);
    const int d = spec.dim;
    const Matrix xsx = x.matrix.adjoint() * x.matrix;
    const Matrix xxs = x.matrix * x.matrix.adjoint();

    auto rising = [m](int k) {
        double p = 1.0;
        for (int j = 1; j <= m; ++j) p *= static_cast<double>(k + j);
        return p;
    };
    auto falling = [m](int k) {
        double p = 1.0;
        for (int j = 0; j < m; ++j) p *= static_cast<double>(k - j);
        return p;
    };

    const int interior = d - m;  // indices 0 .. d-1-m
    double res_rising = 0.0;
    for (int r = 0; r < interior; ++r) {
        for (int c = 0; c < interior; ++c) {
            const double expected = r == c ? rising(r) : 0.0;
            res_rising = std::max(res_rising, std::abs(xsx(r, c) - expected));
        }
    }
    double res_falling = 0.0;
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            const double expected = r == c ? falling(r) : 0.0;
            res_falling = std::max(res_falling, std::abs(xxs(r, c) - expected));
        }
    }

    Report rep;
    rep.check_id = "product_identity";
    rep.anchor = "fock.ladder-power-products";
    rep.parameters = {{"dim", d}, {"m", m}};
    rep.add_residual("rising_product_interior", res_rising);
    rep.add_residual("falling_product_all", res_falling);
    rep.tolerance = 1e-12 * std::pow(static_cast<double>(d), m);
    for (int k = interior; k < d; ++k) rep.boundary_indices.push_back(k);
    rep.status = verdict(res_rising <= rep.tolerance && res_falling <= rep.tolerance);
    return rep;
}

}  // namespace kmsd
