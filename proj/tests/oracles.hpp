#pragma once

// Reference computations that avoid the library code paths they check.

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "kmsd/types.hpp"

namespace oracle {

using kmsd::Complex;
using kmsd::Index;
using kmsd::Matrix;
using kmsd::RealVector;

/// Plain Kronecker product a (x) b.
inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-stacked matrix of xi -> L xi R, written as R^T (x) L.
inline Matrix sandwich(const Matrix& l, const Matrix& r)
{
    return kron(r.transpose(), l);
}

/// Dense generator from its six sandwich terms, built with kron only.
inline Matrix generator(const Matrix& x, double lambda)
{
    const Index d = x.rows();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix xs = x.adjoint();
    const double l2 = lambda * lambda;
    return l2 * (sandwich(xs * x, id) + sandwich(id, xs * x)) + (sandwich(x * xs, id) + sandwich(id, x * xs)) / l2 -
           2.0 * (sandwich(xs, x) + sandwich(x, xs));
}

inline Matrix random_matrix(Index d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index k = 0; k < d; ++k) m(j, k) = Complex(n(rng), n(rng));
    return m;
}

inline Matrix random_hermitian(Index d, std::mt19937_64& rng)
{
    const Matrix g = random_matrix(d, rng);
    Matrix h = g + g.adjoint();
    return h / h.norm();
}

inline RealVector eigenvalues(const Matrix& h)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Gibbs weights by direct summation (no log domain).
inline RealVector gibbs(const std::vector<double>& g, double beta)
{
    RealVector w(g.size());
    double z = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) z += std::exp(-beta * g[k]);
    for (std::size_t k = 0; k < g.size(); ++k) w[k] = std::exp(-beta * g[k]) / z;
    return w;
}

}  // namespace oracle
