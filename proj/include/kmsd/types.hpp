#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace kmsd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an input violates a documented precondition (bad dimension,
/// non-monotone profile, unsupported parameter range, unknown key).
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised instead of returning inf/nan when a modular factor or an inverse
/// power of the density matrix cannot be represented.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dim x dim matrix acting by left multiplication on Hilbert-Schmidt space.
struct AffiliatedOperator {
    Matrix matrix;
    std::string label;

    Index dim() const { return matrix.rows(); }
    AffiliatedOperator adjoint() const { return {matrix.adjoint(), label + " (adjoint)"}; }
};

/// An element of the Hilbert-Schmidt space L2(h) with pairing Tr(a* b).
class HSVector {
public:
    HSVector() = default;
    explicit HSVector(Matrix m) : m_(std::move(m)) {}

    const Matrix& matrix() const { return m_; }
    Matrix& matrix() { return m_; }
    Index dim() const { return m_.rows(); }
    double norm() const { return m_.norm(); }
    double squared_norm() const { return m_.squaredNorm(); }

    HSVector adjoint() const { return HSVector(m_.adjoint()); }

    friend HSVector operator+(const HSVector& a, const HSVector& b) { return HSVector(a.m_ + b.m_); }
    friend HSVector operator-(const HSVector& a, const HSVector& b) { return HSVector(a.m_ - b.m_); }
    friend HSVector operator*(Complex c, const HSVector& a) { return HSVector(c * a.m_); }
    friend HSVector operator*(double c, const HSVector& a) { return HSVector(c * a.m_); }

private:
    Matrix m_;
};

inline Matrix identity(Index dim) { return Matrix::Identity(dim, dim); }

}  // namespace kmsd
