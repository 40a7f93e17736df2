#pragma once

#include <cstdint>
#include <vector>

#include "kmsd/report.hpp"
#include "kmsd/types.hpp"

namespace kmsd {

/// Finite atomic measure space with reference measure m = exp(-h) * counting,
/// potential U and rate V >= 0. The semigroup acts by T_t v = exp(-tV) v.
class AtomicSpace {
public:
    /// U is shifted by a constant so that sum exp(-U - h) = 1. Throws
    /// SpecError on length mismatch, an empty space, non-finite entries or
    /// negative V.
    AtomicSpace(RealVector h, RealVector u, RealVector v);

    Index size() const { return h_.size(); }
    const RealVector& h() const { return h_; }
    /// U after normalization.
    const RealVector& u() const { return u_; }
    const RealVector& v() const { return v_; }
    /// Constant added to the input U.
    double shift() const { return shift_; }
    /// U + h after normalization.
    RealVector potential() const { return u_ + h_; }

private:
    RealVector h_;
    RealVector u_;
    RealVector v_;
    double shift_ = 0.0;
};

/// t0 = max_x (U + h)_+(x) / V(x) / 2; +inf when V(x) = 0 while (U+h)(x) > 0.
double threshold_t0(const AtomicSpace& space);

/// Indicator test: pass iff t V(x) >= (U + h)(x) / 2 at every atom (slack
/// -1e-12 max(1, |U + h|)). Random v are also checked against
/// ||v exp(-tV)||_inf <= ||v||_{L2(m_U)}; a sampled violation with a
/// passing indicator test is reported as an inconsistency.
Report supercontractive_check(const AtomicSpace& space, double t, int samples = 0, std::uint64_t seed = 0);

}  // namespace kmsd
