#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cstree/cstree.hpp"

namespace cstree::fixtures {

/// Random recursive tree: vertex i attaches to a uniform earlier vertex.
/// Labels "0".."n-1", root "0".
inline DirectedTree random_tree(std::mt19937_64& rng, int n) {
  TreeSpec spec;
  spec.root = "0";
  for (int i = 0; i < n; ++i) spec.vertices.push_back(std::to_string(i));
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    spec.edges.push_back({std::to_string(pick(rng)), std::to_string(i)});
  }
  return DirectedTree(spec);
}

inline Complex random_nonzero(std::mt19937_64& rng, double lo = 0.3, double hi = 2.0) {
  std::uniform_real_distribution<double> mod(lo, hi);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return std::polar(mod(rng), angle(rng));
}

inline WeightAssignment random_weights(std::mt19937_64& rng, const DirectedTree& t) {
  WeightAssignment w;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (i != t.root_index()) w[t.label(i)] = random_nonzero(rng);
  return w;
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) { return random_matrix(rng, n, 1).col(0); }

/// Q Q^T for a random unitary Q is a symmetric unitary.
inline Matrix random_symmetric_unitary(std::mt19937_64& rng, Index n) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  const Matrix q = qr.householderQ();
  return q * q.transpose();
}

inline std::vector<VertexId> index_basis(Index n) {
  std::vector<VertexId> b;
  for (Index i = 0; i < n; ++i) b.push_back(std::to_string(i));
  return b;
}

/// Root with a leaf child and a two-step branch: lambda_{1,1} = lambda_{2,1} = l, lambda_{2,2} = sqrt2 l.
inline DirectedTree fork_tree() {
  return DirectedTree(TreeSpec{{"0", "1,1", "2,1", "2,2"}, "0", {{"0", "1,1"}, {"0", "2,1"}, {"2,1", "2,2"}}});
}

inline WeightAssignment fork_weights(Complex l = 1.0) {
  return {{"1,1", l}, {"2,1", l}, {"2,2", std::sqrt(2.0) * l}};
}

inline DirectedTree stem_fork_tree() {
  return DirectedTree(
      TreeSpec{{"-1", "0", "1,1", "2,1", "2,2"}, "-1", {{"-1", "0"}, {"0", "1,1"}, {"0", "2,1"}, {"2,1", "2,2"}}});
}

inline WeightAssignment stem_fork_weights() { return {{"0", 1.0}, {"1,1", 1.0}, {"2,1", 1.0}, {"2,2", 1.0}}; }

/// Known images of C on the fork basis.
inline std::vector<std::pair<VertexId, Vector>> fork_images(const DirectedTree& t) {
  const auto n = static_cast<Index>(t.size());
  auto e = [&](const char* v) {
    Vector x = Vector::Zero(n);
    x(static_cast<Index>(t.index_of(v))) = 1.0;
    return x;
  };
  const double r = 1.0 / std::sqrt(2.0);
  return {{"0", e("2,2")}, {"2,2", e("0")}, {"1,1", r * (e("2,1") - e("1,1"))}, {"2,1", r * (e("1,1") + e("2,1"))}};
}

/// dim ker S^m on two_branch(kappa, theta) with nonzero generation weights:
/// the kernel is H_theta + ... + H_{theta-m+1}, H_j two-dimensional for
/// j >= 1 and one-dimensional for -kappa <= j <= 0.
inline std::size_t two_branch_ker_dim(int kappa, int theta, int m) {
  std::size_t d = 0;
  for (int j = theta - m + 1; j <= theta; ++j) {
    if (j >= 1) d += 2;
    else if (j >= -kappa) d += 1;
  }
  return d;
}

/// dim ker S*^m: the first m levels from the root side, H_{-kappa}, ...
inline std::size_t two_branch_ker_adjoint_dim(int kappa, int theta, int m) {
  return static_cast<std::size_t>(std::min(m, kappa + theta + 1) + std::min(m, theta));
}

}  // namespace cstree::fixtures
