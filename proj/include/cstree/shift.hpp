#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cstree/core.hpp"
#include "cstree/tree.hpp"

namespace cstree {

/// Weights lambda_v on the non-root vertices of a tree.
using WeightAssignment = std::map<VertexId, Complex, LabelLess>;

/// Dense matrix of the weighted shift in the basis {e_v}, v in basis order.
/// Column u holds lambda_v at row v for every child v of u.
struct ShiftMatrix {
  std::vector<VertexId> basis;
  Matrix matrix;
  std::size_t depth = 0;

  Index dim() const { return matrix.rows(); }
};

inline WeightAssignment constant_weights(const DirectedTree& t, Complex value) {
  WeightAssignment w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i != t.root_index()) w[t.label(i)] = value;
  }
  return w;
}

/// Weight of a vertex at depth k is per_depth[k-1].
inline WeightAssignment generation_weights(const DirectedTree& t, std::span<const Complex> per_depth) {
  if (per_depth.size() < t.depth()) {
    throw InputError("need " + std::to_string(t.depth()) + " generation weights, got " +
                     std::to_string(per_depth.size()));
  }
  WeightAssignment w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i != t.root_index()) w[t.label(i)] = per_depth[t.depth_of(i) - 1];
  }
  return w;
}

inline bool all_nonzero(const WeightAssignment& w) {
  return std::all_of(w.begin(), w.end(), [](const auto& kv) { return kv.second != Complex(0.0); });
}

inline ShiftMatrix build_shift(const DirectedTree& t, const WeightAssignment& w) {
  for (const auto& [label, value] : w) {
    const auto i = t.find(label);
    if (!i) throw InputError("weight supplied for unknown vertex " + label);
    if (*i == t.root_index()) throw InputError("weight supplied for root " + label);
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw InputError("weight for vertex " + label + " is not finite");
    }
  }
  const auto n = static_cast<Index>(t.size());
  ShiftMatrix s{t.vertices(), Matrix::Zero(n, n), t.depth()};
  for (std::size_t v = 0; v < t.size(); ++v) {
    const auto p = t.parent(v);
    if (!p) continue;
    const auto it = w.find(t.label(v));
    if (it == w.end()) throw InputError("missing weight for vertex " + t.label(v));
    s.matrix(static_cast<Index>(v), static_cast<Index>(*p)) = it->second;
  }
  return s;
}

/// Conjugate transpose; S* e_v = conj(lambda_v) e_parent(v).
inline ShiftMatrix adjoint(const ShiftMatrix& s) {
  return ShiftMatrix{s.basis, s.matrix.adjoint(), s.depth};
}

struct KernelRow {
  int power = 0;
  std::size_t dim_ker = 0;
  std::size_t dim_ker_adjoint = 0;
};

struct KernelTable {
  std::size_t dim = 0;
  double rank_tol = kDefaultRankTol;
  std::vector<KernelRow> rows;
};

/// dim ker T^m and dim ker T*^m for m = 1..max_power, each as n minus the
/// numerical rank at relative threshold rank_tol.
inline KernelTable kernel_table(const Matrix& t, int max_power, double rank_tol = kDefaultRankTol) {
  if (max_power < 1) throw InputError("max_power must be >= 1");
  const auto n = static_cast<std::size_t>(t.rows());
  KernelTable table{n, rank_tol, {}};
  Matrix p = Matrix::Identity(t.rows(), t.cols());
  for (int m = 1; m <= max_power; ++m) {
    p = p * t;
    const Matrix pa = p.adjoint();
    table.rows.push_back({m, n - numerical_rank(p, rank_tol), n - numerical_rank(pa, rank_tol)});
  }
  return table;
}

struct PositivizedWeights {
  WeightAssignment weights;  // |lambda_v|
  Vector gauge;              // diagonal of D, unimodular, D* S_lambda D = S_|lambda|
};

/// Diagonal unitary gauge making all weights positive, built from the root
/// down: d_root = 1, d_v = d_parent(v) * lambda_v / |lambda_v|.
inline PositivizedWeights positivize_weights(const DirectedTree& t, const WeightAssignment& w) {
  PositivizedWeights out{{}, Vector::Ones(static_cast<Index>(t.size()))};
  for (std::size_t v : t.bfs_order()) {
    const auto p = t.parent(v);
    if (!p) continue;
    const auto it = w.find(t.label(v));
    if (it == w.end()) throw InputError("missing weight for vertex " + t.label(v));
    const double mod = std::abs(it->second);
    if (mod == 0.0) throw InputError("zero weight at vertex " + t.label(v));
    out.weights[t.label(v)] = mod;
    out.gauge(static_cast<Index>(v)) = out.gauge(static_cast<Index>(*p)) * (it->second / mod);
  }
  return out;
}

/// ||D* S D - S_pos||_F for a diagonal gauge D.
inline double gauge_residual(const Matrix& s, const Matrix& s_pos, const Vector& gauge) {
  const Matrix conjugated = gauge.conjugate().asDiagonal() * s * gauge.asDiagonal();
  return (conjugated - s_pos).norm();
}

}  // namespace cstree
