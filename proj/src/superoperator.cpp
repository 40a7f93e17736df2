#include "kmsd/superoperator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace kmsd {

SuperOperator::SuperOperator(Index dim) : dim_(dim), cache_(std::make_shared<Cache>()) {}

SuperOperator SuperOperator::identity(Index dim)
{
    return sandwich(Matrix::Identity(dim, dim), Matrix::Identity(dim, dim));
}

SuperOperator SuperOperator::left(const Matrix& y)
{
    return sandwich(y, Matrix::Identity(y.rows(), y.rows()));
}

SuperOperator SuperOperator::right(const Matrix& z)
{
    return sandwich(Matrix::Identity(z.rows(), z.rows()), z);
}

SuperOperator SuperOperator::sandwich(const Matrix& l, const Matrix& r)
{
    if (l.rows() != l.cols() || r.rows() != r.cols() || l.rows() != r.rows())
        throw SpecError("sandwich factors must be square matrices of equal size");
    SuperOperator s(l.rows());
    s.add_term(l, r);
    return s;
}

void SuperOperator::add_term(Matrix l, Matrix r)
{
    terms_.push_back({std::move(l), std::move(r)});
    cache_ = std::make_shared<Cache>();
}

Matrix SuperOperator::apply(const Matrix& xi) const
{
    if (xi.rows() != dim_ || xi.cols() != dim_) throw SpecError("superoperator applied to a vector of wrong dimension");
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& t : terms_) out.noalias() += t.left * xi * t.right;
    return out;
}

HSVector SuperOperator::apply(const HSVector& xi) const
{
    return HSVector(apply(xi.matrix()));
}

SuperOperator SuperOperator::adjoint() const
{
    SuperOperator out(dim_);
    for (const auto& t : terms_) out.add_term(t.left.adjoint(), t.right.adjoint());
    return out;
}

const Matrix& SuperOperator::dense() const
{
    std::call_once(cache_->once, [this] {
        const Index n = dim_ * dim_;
        Matrix m = Matrix::Zero(n, n);
        for (const auto& t : terms_) {
            // vec(L xi R) = (R^T kron L) vec(xi)
            for (Index q = 0; q < dim_; ++q) {
                for (Index k = 0; k < dim_; ++k) {
                    const Complex r = t.right(q, k);
                    if (r == Complex(0.0)) continue;
                    m.block(k * dim_, q * dim_, dim_, dim_) += r * t.left;
                }
            }
        }
        cache_->dense = std::move(m);
    });
    return cache_->dense;
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other)
{
    if (dim_ == 0) dim_ = other.dim_;
    if (other.dim_ != dim_) throw SpecError("cannot add superoperators of different dimension");
    for (const auto& t : other.terms_) terms_.push_back(t);
    cache_ = std::make_shared<Cache>();
    return *this;
}

SuperOperator operator*(Complex c, const SuperOperator& a)
{
    SuperOperator out(a.dim_);
    for (const auto& t : a.terms_) out.add_term(c * t.left, t.right);
    return out;
}

SuperOperator operator*(const SuperOperator& a, const SuperOperator& b)
{
    if (a.dim_ != b.dim_) throw SpecError("cannot compose superoperators of different dimension");
    SuperOperator out(a.dim_);
    // L_a (L_b xi R_b) R_a
    for (const auto& ta : a.terms_) {
        for (const auto& tb : b.terms_) out.add_term(ta.left * tb.left, tb.right * ta.right);
    }
    return out;
}

Eigen::VectorXcd vec(const Matrix& xi)
{
    return Eigen::Map<const Eigen::VectorXcd>(xi.data(), xi.size());
}

Matrix unvec(const Eigen::VectorXcd& v, Index dim)
{
    if (v.size() != dim * dim) throw SpecError("unvec: length is not dim^2");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

double spectral_norm(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& m)
{
    const Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace kmsd
