#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cstree {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Raised for malformed user input: documents, parameters, weight maps.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kDefaultRankTol = 1e-10;

/// Singular values of `m`, descending. Empty matrices have none.
inline Eigen::VectorXd singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

/// Count of singular values strictly above rel_tol * sigma_max.
inline std::size_t numerical_rank(const Matrix& m, double rel_tol) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  return static_cast<std::size_t>((sv.array() > cut).count());
}

/// Orthonormal basis (columns) of the numerical null space of `m`.
inline Matrix null_space(const Matrix& m, double rel_tol) {
  const Index cols = m.cols();
  if (m.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Index rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double cut = rel_tol * sv(0);
    rank = static_cast<Index>((sv.array() > cut).count());
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis of the column span of `m`.
inline Matrix range_space(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const std::size_t r = numerical_rank(m, rel_tol);
  return svd.matrixU().leftCols(static_cast<Index>(r));
}

/// Orthonormal basis of the orthogonal complement of span(columns of q).
/// `q` must have orthonormal columns.
inline Matrix orthogonal_complement(const Matrix& q, Index dim) {
  const Matrix proj = Matrix::Identity(dim, dim) - q * q.adjoint();
  return range_space(proj, 1e-8);
}

/// Spectral-norm distance between the orthogonal projectors onto two
/// subspaces given by orthonormal column bases. Zero iff the spans agree.
inline double subspace_distance(const Matrix& a, const Matrix& b) {
  const Index n = std::max(a.rows(), b.rows());
  Matrix pa = Matrix::Zero(n, n);
  Matrix pb = Matrix::Zero(n, n);
  if (a.cols() > 0) pa = a * a.adjoint();
  if (b.cols() > 0) pb = b * b.adjoint();
  const Eigen::VectorXd sv = singular_values(pa - pb);
  return sv.size() == 0 ? 0.0 : sv(0);
}

}  // namespace cstree
