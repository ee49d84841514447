#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cstree/core.hpp"
#include "cstree/tree.hpp"

namespace cstree {

/// Raised when a proposed conjugation is not a symmetric unitary.
class ConjugationError : public std::runtime_error {
 public:
  ConjugationError(const std::string& what, double unitary, double symmetric)
      : std::runtime_error(what), unitary_residual(unitary), symmetric_residual(symmetric) {}
  double unitary_residual;
  double symmetric_residual;
};

/// Antilinear map f -> A conj(f). It is a conjugation (C^2 = I and
/// <Cf, Cg> = <g, f>) exactly when A is unitary and A = A^T.
class Conjugation {
 public:
  static Conjugation from_matrix(Matrix a, std::vector<VertexId> basis, double tol = kDefaultTol) {
    if (a.rows() != a.cols()) throw std::invalid_argument("conjugation matrix must be square");
    if (!basis.empty() && static_cast<Index>(basis.size()) != a.rows()) {
      throw std::invalid_argument("basis size does not match conjugation matrix");
    }
    Conjugation c(std::move(a), std::move(basis));
    const double u = c.unitary_residual();
    const double s = c.symmetric_residual();
    if (!(u <= tol) || !(s <= tol)) {
      throw ConjugationError("not a conjugation: ||AA*-I||_F = " + std::to_string(u) +
                                 ", ||A-A^T||_F = " + std::to_string(s),
                             u, s);
    }
    return c;
  }

  const Matrix& matrix() const { return a_; }
  const std::vector<VertexId>& basis() const { return basis_; }
  Index dim() const { return a_.rows(); }

  Vector apply(const Vector& f) const { return a_ * f.conjugate(); }

  double unitary_residual() const {
    return (a_ * a_.adjoint() - Matrix::Identity(a_.rows(), a_.cols())).norm();
  }
  double symmetric_residual() const { return (a_ - a_.transpose()).norm(); }

 private:
  Conjugation(Matrix a, std::vector<VertexId> basis) : a_(std::move(a)), basis_(std::move(basis)) {}

  Matrix a_;
  std::vector<VertexId> basis_;
};

/// Assembles C from its values on an orthonormal basis {u_k}: antilinearity
/// gives A conj(u_k) = C u_k, hence A = W U^T with U = [u_k], W = [C u_k].
inline Conjugation from_basis_images(const std::vector<std::pair<Vector, Vector>>& images,
                                     std::vector<VertexId> basis, double tol = kDefaultTol) {
  const auto n = static_cast<Index>(images.size());
  Matrix u(n, n);
  Matrix w(n, n);
  for (Index k = 0; k < n; ++k) {
    const auto& [src, dst] = images[static_cast<std::size_t>(k)];
    if (src.size() != n || dst.size() != n) {
      throw std::invalid_argument("basis image has wrong dimension");
    }
    u.col(k) = src;
    w.col(k) = dst;
  }
  const double ortho = (u.adjoint() * u - Matrix::Identity(n, n)).norm();
  if (ortho > tol) {
    throw std::invalid_argument("source vectors are not orthonormal (residual " + std::to_string(ortho) + ")");
  }
  return Conjugation::from_matrix(w * u.transpose(), std::move(basis), tol);
}

/// Same, with sources named by basis labels (C e_v = image).
inline Conjugation from_basis_images(const std::vector<std::pair<VertexId, Vector>>& images,
                                     const std::vector<VertexId>& basis, double tol = kDefaultTol) {
  const auto n = static_cast<Index>(basis.size());
  if (static_cast<Index>(images.size()) != n) {
    throw std::invalid_argument("need one image per basis vector");
  }
  std::vector<std::pair<Vector, Vector>> vec_images;
  for (const auto& [label, img] : images) {
    const auto it = std::find(basis.begin(), basis.end(), label);
    if (it == basis.end()) throw InputError("unknown basis label " + label);
    Vector e = Vector::Zero(n);
    e(static_cast<Index>(it - basis.begin())) = 1.0;
    vec_images.emplace_back(std::move(e), img);
  }
  return from_basis_images(vec_images, basis, tol);
}

struct SymmetryReport {
  double residual = 0.0;       // ||T A - A T^T||_F
  bool pass = false;
  Index worst_column = -1;     // basis vector e_k with the largest ||(TA - AT^T) e_k||
  double worst_column_residual = 0.0;
};

/// T = C T* C  <=>  T A = A T^T for C f = A conj(f).
inline SymmetryReport verify_c_symmetry(const Matrix& t, const Conjugation& c, double tol = kDefaultTol) {
  if (t.rows() != t.cols() || t.rows() != c.dim()) {
    throw std::invalid_argument("operator and conjugation dimensions differ");
  }
  const Matrix defect = t * c.matrix() - c.matrix() * t.transpose();
  SymmetryReport r;
  r.residual = defect.norm();
  r.pass = r.residual <= tol;
  for (Index k = 0; k < defect.cols(); ++k) {
    const double col = defect.col(k).norm();
    if (r.worst_column < 0 || col > r.worst_column_residual) {
      r.worst_column = k;
      r.worst_column_residual = col;
    }
  }
  return r;
}

}  // namespace cstree
