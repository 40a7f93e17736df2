#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "kmsd/types.hpp"

namespace kmsd {

/// A linear map on Hilbert-Schmidt space stored as a sum of sandwiches
/// xi -> sum_i L_i xi R_i.
///
/// The dense realization uses column stacking, vec(xi)[j + k*dim] = xi(j, k),
/// so the entry ((j,k),(p,q)) equals sum_i L_i(j,p) R_i(q,k). It is built on
/// first request and cached; concurrent calls to dense() are safe.
class SuperOperator {
public:
    struct Term {
        Matrix left;
        Matrix right;
    };

    explicit SuperOperator(Index dim = 0);

    static SuperOperator zero(Index dim) { return SuperOperator(dim); }
    static SuperOperator identity(Index dim);
    /// xi -> Y xi
    static SuperOperator left(const Matrix& y);
    /// xi -> xi Z
    static SuperOperator right(const Matrix& z);
    /// xi -> L xi R
    static SuperOperator sandwich(const Matrix& l, const Matrix& r);

    Index dim() const { return dim_; }
    const std::vector<Term>& terms() const { return terms_; }

    HSVector apply(const HSVector& xi) const;
    Matrix apply(const Matrix& xi) const;

    /// Adjoint with respect to the Hilbert-Schmidt pairing: (L, R) -> (L^*, R^*).
    SuperOperator adjoint() const;

    const Matrix& dense() const;

    SuperOperator& operator+=(const SuperOperator& other);
    friend SuperOperator operator+(SuperOperator a, const SuperOperator& b) { return a += b; }
    friend SuperOperator operator-(SuperOperator a, const SuperOperator& b) { return a += Complex(-1.0) * b; }
    friend SuperOperator operator*(Complex c, const SuperOperator& a);
    friend SuperOperator operator*(double c, const SuperOperator& a) { return Complex(c) * a; }
    /// Composition: (a * b)(xi) = a(b(xi)).
    friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b);

private:
    struct Cache {
        std::once_flag once;
        Matrix dense;
    };

    void add_term(Matrix l, Matrix r);

    Index dim_ = 0;
    std::vector<Term> terms_;
    std::shared_ptr<Cache> cache_;
};

/// Column-stacking vectorization and its inverse.
Eigen::VectorXcd vec(const Matrix& xi);
Matrix unvec(const Eigen::VectorXcd& v, Index dim);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

}  // namespace kmsd
