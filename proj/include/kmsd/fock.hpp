#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "kmsd/report.hpp"
#include "kmsd/types.hpp"

namespace kmsd {

/// Hamiltonian profile g evaluated on the number basis: the Gibbs state is
/// proportional to exp(-beta g(N)).
class Profile {
public:
    struct Linear {};
    struct Log {
        double offset = 2.0;  // g(k) = ln(k + offset), offset >= 2
    };
    struct Table {
        std::vector<double> values;  // g(k) = values[k]
    };

    static Profile linear() { return Profile(Linear{}); }
    static Profile log(double offset);
    static Profile table(std::vector<double> values);

    /// g(k) for k >= -1. g(-1) is defined as g(0); the only consumer of that
    /// value is a factor that the annihilator kills.
    double operator()(int k) const;

    /// Largest k for which g(k) is defined (table profiles are finite).
    int max_index() const;

    const char* kind() const;
    const std::variant<Linear, Log, Table>& variant() const { return v_; }

private:
    explicit Profile(std::variant<Linear, Log, Table> v) : v_(std::move(v)) {}
    std::variant<Linear, Log, Table> v_;
};

struct FockSpec {
    int dim = 2;
    Profile g = Profile::linear();
    double beta = 1.0;

    /// Throws SpecError on dim < 2, beta <= 0, a profile too short for dim,
    /// or g decreasing anywhere on {0, ..., dim-1}.
    void validate() const;
};

struct GibbsData {
    FockSpec spec;
    RealVector weights;      // w_k, sums to 1 over the truncation
    RealVector log_weights;  // ln w_k
    HSVector xi0;            // diag(sqrt(w_k)), the cyclic vector
    HSVector rho;            // diag(w_k)
    double log_z = 0.0;      // ln sum_k exp(-beta g(k)), truncated
};

GibbsData gibbs_data(const FockSpec& spec);

/// Untruncated weights (1 - e^{-beta}) e^{-beta k} of the linear profile,
/// for comparison against the renormalized truncation.
RealVector analytic_linear_weights(double beta, int dim);

struct LadderPair {
    AffiliatedOperator annihilation;
    AffiliatedOperator creation;
};

/// Truncated ladder operators: A e_k = sqrt(k) e_{k-1}, creation = A^*.
LadderPair ladder(const FockSpec& spec);

/// diag(0, 1, ..., dim-1).
AffiliatedOperator number_operator(const FockSpec& spec);

/// g(N) as a diagonal matrix.
AffiliatedOperator profile_operator(const FockSpec& spec);

/// X_m = (A^*)^m. Throws SpecError unless 1 <= m < dim (m >= dim truncates
/// to the zero matrix).
AffiliatedOperator ladder_power(const FockSpec& spec, int m);

/// Checks X_m^* X_m = (N+1)...(N+m) on {0, ..., dim-1-m} and
/// X_m X_m^* = N(N-1)...(N-m+1) on every index. The indices where the first
/// identity is not asserted are listed in the report.
Report product_identity_check(const FockSpec& spec, int m);

}  // namespace kmsd
