#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cstree/conjugation.hpp"
#include "cstree/core.hpp"
#include "cstree/shift.hpp"
#include "cstree/tree.hpp"

namespace cstree {

// ---------------------------------------------------------------------------
// Weight families

/// Weights on the two-branch tree with equal branches: trunk holds
/// lambda_{-kappa+1..0} (indexed by the target vertex), branch holds
/// lambda_{1..theta}, shared by "1,j" and "2,j".
struct TwoBranchWeights {
  std::vector<Complex> trunk;
  std::vector<Complex> branch;

  int kappa() const { return static_cast<int>(trunk.size()); }
  int theta() const { return static_cast<int>(branch.size()); }

  /// lambda_index, or nothing when the index is outside [-kappa+1, theta].
  std::optional<Complex> at(int index) const {
    if (index >= 1 && index <= theta()) return branch[static_cast<std::size_t>(index - 1)];
    if (index <= 0 && index >= 1 - kappa()) return trunk[static_cast<std::size_t>(index + kappa() - 1)];
    return std::nullopt;
  }

  /// Splits a flat list (trunk first, then branch).
  static TwoBranchWeights from_flat(int kappa, int theta, std::span<const Complex> values) {
    if (kappa < 0 || theta < 1) throw InputError("two-branch parameters out of range");
    if (values.size() != static_cast<std::size_t>(kappa + theta)) {
      throw InputError("two-branch weights: expected " + std::to_string(kappa + theta) + " values (kappa trunk + theta branch), got " +
                       std::to_string(values.size()));
    }
    TwoBranchWeights w;
    w.trunk.assign(values.begin(), values.begin() + kappa);
    w.branch.assign(values.begin() + kappa, values.end());
    return w;
  }

  std::vector<Complex> flat() const {
    std::vector<Complex> out(trunk);
    out.insert(out.end(), branch.begin(), branch.end());
    return out;
  }

  WeightAssignment assignment() const {
    WeightAssignment w;
    for (int i = 0; i < kappa(); ++i) w[std::to_string(-kappa() + 1 + i)] = trunk[static_cast<std::size_t>(i)];
    for (int b = 1; b <= 2; ++b)
      for (int j = 1; j <= theta(); ++j) w[detail::coord(b, j)] = branch[static_cast<std::size_t>(j - 1)];
    return w;
  }
};

/// One weight per generation of the complete binary tree: lambda_1..lambda_kappa.
struct BinaryWeights {
  std::vector<Complex> per_generation;

  int kappa() const { return static_cast<int>(per_generation.size()); }

  std::optional<Complex> at(int k) const {
    if (k < 1 || k > kappa()) return std::nullopt;
    return per_generation[static_cast<std::size_t>(k - 1)];
  }

  WeightAssignment assignment() const {
    const DirectedTree t = generate_binary(kappa());
    return generation_weights(t, per_generation);
  }
};

// ---------------------------------------------------------------------------
// Criteria evaluated as stated for the two families

struct ClauseCheck {
  std::string clause;
  int index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct SkippedIndex {
  std::string clause;
  int index = 0;
  std::string reason;
};

struct ConditionReport {
  bool satisfied = true;
  double tol = 0.0;
  std::vector<ClauseCheck> checks;
  std::vector<SkippedIndex> skipped;

  std::vector<ClauseCheck> failures() const {
    std::vector<ClauseCheck> out;
    for (const auto& c : checks)
      if (!c.holds) out.push_back(c);
    return out;
  }
};

namespace detail {

inline bool moduli_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::string missing_weight(int index) { return "lambda_" + std::to_string(index) + " is not defined"; }

}  // namespace detail

/// Two-branch criterion on T_{kappa,theta}, clause by clause:
///   (i)   |l_{1+j}| = |l_{theta+1-j}|,          j = 1..theta-1
///   (ii)  theta-kappa = 1: |l_{-kappa+j}| = |l_{theta-j+1}|, j = 1..kappa+theta
///   (iii) theta-kappa != 1: sqrt2 |l_1| = |l_{theta-kappa}| and
///         |l_{-kappa+j}| = |l_{theta-j+1}| for j in 1..kappa+theta, j != kappa
/// References to undefined lambdas are recorded in `skipped`.
inline ConditionReport two_branch_condition(const TwoBranchWeights& w, double tol = 1e-9) {
  const int kappa = w.kappa();
  const int theta = w.theta();
  if (theta < 1) throw InputError("theta must be >= 1");
  ConditionReport r;
  r.tol = tol;
  auto check = [&](const std::string& clause, int index, int lhs_idx, double lhs_factor, int rhs_idx) {
    const auto a = w.at(lhs_idx);
    const auto b = w.at(rhs_idx);
    if (!a || !b) {
      std::string why = !a ? detail::missing_weight(lhs_idx) : "";
      if (!b) why += (why.empty() ? "" : ", ") + detail::missing_weight(rhs_idx);
      r.skipped.push_back({clause, index, why});
      return;
    }
    ClauseCheck c{clause, index, lhs_factor * std::abs(*a), std::abs(*b), false};
    c.holds = detail::moduli_equal(c.lhs, c.rhs, tol);
    r.satisfied = r.satisfied && c.holds;
    r.checks.push_back(c);
  };
  for (int j = 1; j <= theta - 1; ++j) check("i", j, 1 + j, 1.0, theta + 1 - j);
  if (theta - kappa == 1) {
    for (int j = 1; j <= kappa + theta; ++j) check("ii", j, -kappa + j, 1.0, theta - j + 1);
  } else {
    check("iii.a", theta - kappa, 1, std::sqrt(2.0), theta - kappa);
    for (int j = 1; j <= kappa + theta; ++j) {
      if (j == kappa) continue;
      check("iii.b", j, -kappa + j, 1.0, theta - j + 1);
    }
  }
  return r;
}

/// Binary-tree criterion 2|l_{l+1}| = |l_{kappa-l}| for l = 0..kappa.
inline ConditionReport binary_condition(const BinaryWeights& w, double tol = 1e-9) {
  const int kappa = w.kappa();
  if (kappa < 2) throw InputError("binary tree depth kappa must be >= 2");
  ConditionReport r;
  r.tol = tol;
  for (int l = 0; l <= kappa; ++l) {
    const auto a = w.at(l + 1);
    const auto b = w.at(kappa - l);
    if (!a || !b) {
      std::string why = !a ? detail::missing_weight(l + 1) : "";
      if (!b) why += (why.empty() ? "" : ", ") + detail::missing_weight(kappa - l);
      r.skipped.push_back({"pair", l, why});
      continue;
    }
    ClauseCheck c{"pair", l, 2.0 * std::abs(*a), std::abs(*b), false};
    c.holds = detail::moduli_equal(c.lhs, c.rhs, tol);
    r.satisfied = r.satisfied && c.holds;
    r.checks.push_back(c);
  }
  return r;
}

struct AlphaEntry {
  int l = 0;
  double modulus = 0.0;  // |alpha| with alpha f_{kappa-l} spanning C f_l, = ||f_l|| / ||f_{kappa-l}||
};

/// Norm bookkeeping for C(C f_{kappa-l}) = C f_l, where f_k sums the 2^k
/// basis vectors of generation k.
inline std::vector<AlphaEntry> binary_alpha_chain(int kappa) {
  if (kappa < 1) throw InputError("kappa must be >= 1");
  std::vector<AlphaEntry> out;
  for (int l = 0; l <= kappa; ++l) out.push_back({l, std::pow(2.0, (2.0 * l - kappa) / 2.0)});
  return out;
}

/// |w_j| = |w_{n+1-j}| for all j.
inline bool palindrome_condition(std::span<const Complex> w, double tol = 1e-9) {
  const std::size_t n = w.size();
  for (std::size_t j = 0; j < n / 2; ++j) {
    if (!detail::moduli_equal(std::abs(w[j]), std::abs(w[n - 1 - j]), tol)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Constructive conjugation for the two-branch family

struct PhaseSequence {
  std::vector<Complex> delta;  // delta_0..delta_{theta-1}
  std::vector<Complex> gamma;  // gamma_0..gamma_{theta+kappa}
};

class PhaseRecursionError : public std::runtime_error {
 public:
  PhaseRecursionError(std::string seq, int j, double mod)
      : std::runtime_error("phase recursion for " + seq + " breaks unimodularity at step j=" + std::to_string(j) +
                           " (|" + seq + "_j| = " + std::to_string(mod) + ")"),
        sequence(std::move(seq)),
        step(j),
        modulus(mod) {}
  std::string sequence;
  int step;
  double modulus;
};

/// Phases of C in the symmetrized basis, seeds delta_0 = gamma_0 = 1:
///   l_{1+j} delta_{j-1} = delta_j l_{theta-j+1}
///   nu_j l_{-kappa+j} gamma_{j-1} = gamma_j mu_j l_{theta-j+1}
/// with mu_j = sqrt2 iff j = theta and nu_j = sqrt2 iff j = kappa+1.
inline PhaseSequence two_branch_phases(const TwoBranchWeights& w, double tol = 1e-9) {
  const int kappa = w.kappa();
  const int theta = w.theta();
  const double r2 = std::sqrt(2.0);
  PhaseSequence ph;
  ph.delta.push_back(1.0);
  for (int j = 1; j <= theta - 1; ++j) {
    const Complex d = ph.delta.back() * *w.at(1 + j) / *w.at(theta - j + 1);
    if (std::abs(std::abs(d) - 1.0) > tol) throw PhaseRecursionError("delta", j, std::abs(d));
    ph.delta.push_back(d);
  }
  ph.gamma.push_back(1.0);
  for (int j = 1; j <= theta + kappa; ++j) {
    const double mu = (j == theta) ? r2 : 1.0;
    const double nu = (j == kappa + 1) ? r2 : 1.0;
    const Complex g = ph.gamma.back() * nu * *w.at(-kappa + j) / (mu * *w.at(theta - j + 1));
    if (std::abs(std::abs(g) - 1.0) > tol) throw PhaseRecursionError("gamma", j, std::abs(g));
    ph.gamma.push_back(g);
  }
  return ph;
}

namespace detail {

/// e-basis coordinates of f_m (m = -kappa..theta) and g_j (j = 1..theta)
/// on generate_two_branch(kappa, theta).
struct TwoBranchFrame {
  const DirectedTree& tree;
  int kappa;
  Vector f(int m) const {
    Vector v = Vector::Zero(static_cast<Index>(tree.size()));
    if (m <= 0) {
      v(static_cast<Index>(tree.index_of(std::to_string(m)))) = 1.0;
    } else {
      const double r = 1.0 / std::sqrt(2.0);
      v(static_cast<Index>(tree.index_of(coord(1, m)))) = r;
      v(static_cast<Index>(tree.index_of(coord(2, m)))) = r;
    }
    return v;
  }
  Vector g(int j) const {
    Vector v = Vector::Zero(static_cast<Index>(tree.size()));
    const double r = 1.0 / std::sqrt(2.0);
    v(static_cast<Index>(tree.index_of(coord(1, j)))) = r;
    v(static_cast<Index>(tree.index_of(coord(2, j)))) = -r;
    return v;
  }
};

}  // namespace detail

/// Conjugation making S_lambda on T_{kappa,theta} C-symmetric, built from
/// the positive-weight gauge: C g_{1+j} = delta_j g_{theta-j},
/// C f_{-kappa+j} = gamma_j f_{theta-j}, then A = D A_+ D^T. The result is
/// re-verified against S_lambda before it is returned.
inline Conjugation two_branch_conjugation(const TwoBranchWeights& w, double tol = kDefaultTol,
                                          double phase_tol = 1e-9) {
  const int kappa = w.kappa();
  const int theta = w.theta();
  const DirectedTree tree = generate_two_branch(kappa, theta);
  const WeightAssignment assignment = w.assignment();
  const ShiftMatrix s = build_shift(tree, assignment);
  const PositivizedWeights pos = positivize_weights(tree, assignment);

  TwoBranchWeights moduli;
  for (const auto& x : w.trunk) moduli.trunk.emplace_back(std::abs(x));
  for (const auto& x : w.branch) moduli.branch.emplace_back(std::abs(x));
  const PhaseSequence ph = two_branch_phases(moduli, phase_tol);

  const detail::TwoBranchFrame frame{tree, kappa};
  const auto n = static_cast<Index>(tree.size());
  Matrix a_pos = Matrix::Zero(n, n);
  // Real orthonormal frame: A_+ = sum_p (C b_p) b_p^T.
  for (int j = 0; j <= theta - 1; ++j) {
    a_pos += ph.delta[static_cast<std::size_t>(j)] * frame.g(theta - j) * frame.g(1 + j).transpose();
  }
  for (int j = 0; j <= theta + kappa; ++j) {
    a_pos += ph.gamma[static_cast<std::size_t>(j)] * frame.f(theta - j) * frame.f(-kappa + j).transpose();
  }
  const Matrix a = pos.gauge.asDiagonal() * a_pos * pos.gauge.asDiagonal();
  Conjugation c = Conjugation::from_matrix(a, tree.vertices(), tol);
  const SymmetryReport rep = verify_c_symmetry(s.matrix, c, tol);
  if (!rep.pass) {
    throw ConjugationError("constructed conjugation fails intertwining: residual " + std::to_string(rep.residual),
                           c.unitary_residual(), c.symmetric_residual());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Orthogonal decomposition into truncated shifts

/// Truncated weighted shift block occupying `weights.size() + 1` consecutive
/// columns of the basis change, source vector first.
struct Chain {
  std::vector<Complex> weights;
  Index offset = 0;
  Index length() const { return static_cast<Index>(weights.size()) + 1; }
};

struct BlockDecomposition {
  std::string shape;  // "path", "two_branch", "binary"
  Matrix basis_change;
  std::vector<Chain> chains;
  double residual = 0.0;  // ||U* T U - blockdiag(chains)||_F
};

inline Matrix chain_matrix(const std::vector<Chain>& chains, Index n) {
  Matrix m = Matrix::Zero(n, n);
  for (const auto& c : chains)
    for (std::size_t p = 0; p < c.weights.size(); ++p) {
      const Index i = c.offset + static_cast<Index>(p);
      m(i + 1, i) = c.weights[p];
    }
  return m;
}

/// Splits a generation-constant weighted shift on a path, a two-branch tree
/// (one branching vertex, two equal branches) or a complete binary tree into
/// an orthogonal sum of truncated shifts.
inline BlockDecomposition decompose_equal_weight_tree(const DirectedTree& t, const WeightAssignment& w,
                                                      double tol = 1e-12) {
  const ShiftMatrix s = build_shift(t, w);
  const std::size_t depth = t.depth();
  std::vector<std::optional<Complex>> gen(depth + 1);
  std::vector<std::vector<std::size_t>> level(depth + 1);
  for (std::size_t v : t.bfs_order()) {
    const std::size_t k = t.depth_of(v);
    level[k].push_back(v);
    if (k == 0) continue;
    const Complex x = w.at(t.label(v));
    if (!gen[k]) {
      gen[k] = x;
    } else if (std::abs(x - *gen[k]) > tol * std::max(1.0, std::abs(*gen[k]))) {
      throw InputError("weights are not generation-constant at depth " + std::to_string(k));
    }
  }
  auto lam = [&](std::size_t k) { return *gen[k]; };
  const auto n = static_cast<Index>(t.size());
  const double r2 = std::sqrt(2.0);

  BlockDecomposition out;
  out.basis_change = Matrix::Zero(n, n);
  Index col = 0;
  auto put = [&](const Vector& v) { out.basis_change.col(col++) = v; };
  auto unit = [&](std::size_t v) {
    Vector e = Vector::Zero(n);
    e(static_cast<Index>(v)) = 1.0;
    return e;
  };

  const auto branching = t.branching_vertices();
  bool all_binary = !branching.empty();
  for (std::size_t v = 0; v < t.size(); ++v) {
    const auto nc = t.children(v).size();
    if (nc != 0 && nc != 2) all_binary = false;
    if (nc == 0 && t.depth_of(v) != depth) all_binary = false;
  }

  if (branching.empty()) {
    out.shape = "path";
    Chain c{{}, 0};
    for (std::size_t k = 0; k <= depth; ++k) {
      put(unit(level[k].front()));
      if (k > 0) c.weights.push_back(lam(k));
    }
    out.chains.push_back(c);
  } else if (branching.size() == 1 && t.children(branching.front()).size() == 2) {
    const std::size_t b = branching.front();
    std::array<std::vector<std::size_t>, 2> arms;
    for (int i = 0; i < 2; ++i) {
      std::size_t cur = t.children(b)[static_cast<std::size_t>(i)];
      while (true) {
        arms[static_cast<std::size_t>(i)].push_back(cur);
        if (t.children(cur).empty()) break;
        cur = t.children(cur).front();
      }
    }
    if (arms[0].size() != arms[1].size()) throw InputError("two-branch tree needs branches of equal length");
    out.shape = "two_branch";
    const std::size_t kappa = t.depth_of(b);
    const std::size_t theta = arms[0].size();
    Chain f{{}, 0};
    for (std::size_t k = 0; k <= kappa; ++k) {
      put(unit(level[k].front()));
      if (k > 0) f.weights.push_back(lam(k));
    }
    for (std::size_t j = 0; j < theta; ++j) {
      put((unit(arms[0][j]) + unit(arms[1][j])) / r2);
      f.weights.push_back(j == 0 ? r2 * lam(kappa + 1) : lam(kappa + 1 + j));
    }
    Chain g{{}, col};
    for (std::size_t j = 0; j < theta; ++j) {
      put((unit(arms[0][j]) - unit(arms[1][j])) / r2);
      if (j > 0) g.weights.push_back(lam(kappa + 1 + j));
    }
    out.chains.push_back(f);
    out.chains.push_back(g);
  } else if (all_binary) {
    out.shape = "binary";
    Chain main{{}, 0};
    for (std::size_t k = 0; k <= depth; ++k) {
      Vector v = Vector::Zero(n);
      for (std::size_t u : level[k]) v(static_cast<Index>(u)) = 1.0;
      put(v / std::sqrt(static_cast<double>(level[k].size())));
      if (k > 0) main.weights.push_back(r2 * lam(k));
    }
    out.chains.push_back(main);
    for (std::size_t v : t.bfs_order()) {
      if (t.children(v).empty()) continue;
      const std::size_t k = t.depth_of(v);
      Chain c{{}, col};
      std::vector<std::size_t> left{t.children(v)[0]};
      std::vector<std::size_t> right{t.children(v)[1]};
      for (std::size_t j = k + 1; j <= depth; ++j) {
        Vector x = Vector::Zero(n);
        for (std::size_t u : left) x(static_cast<Index>(u)) = 1.0;
        for (std::size_t u : right) x(static_cast<Index>(u)) = -1.0;
        put(x / std::sqrt(static_cast<double>(left.size() + right.size())));
        if (j > k + 1) c.weights.push_back(r2 * lam(j));
        std::vector<std::size_t> nl, nr;
        for (std::size_t u : left) nl.insert(nl.end(), t.children(u).begin(), t.children(u).end());
        for (std::size_t u : right) nr.insert(nr.end(), t.children(u).begin(), t.children(u).end());
        left = std::move(nl);
        right = std::move(nr);
      }
      out.chains.push_back(c);
    }
  } else {
    throw InputError("tree is not a path, an equal-branch two-branch tree, or a complete binary tree");
  }
  if (col != n) throw InputError("decomposition does not span the space");
  const Matrix& u = out.basis_change;
  out.residual = (u.adjoint() * s.matrix * u - chain_matrix(out.chains, n)).norm();
  return out;
}

struct PairingCertificate {
  Conjugation conjugation;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (i, i) = palindromic chain
};

/// Explicit conjugation when the chains split into palindromic chains and
/// mirror pairs (moduli reversed). On each piece C is the gauge-adjusted
/// flip D_i F D_j^T; the assembled A = U A_blocks U^T is verified against T.
inline std::optional<PairingCertificate> reversal_pairing_cs(const BlockDecomposition& d, const Matrix& t,
                                                             const std::vector<VertexId>& basis,
                                                             double tol = kDefaultTol, double match_tol = 1e-9) {
  const std::size_t k = d.chains.size();
  auto moduli = [&](std::size_t i) {
    std::vector<double> m;
    for (const auto& x : d.chains[i].weights) m.push_back(std::abs(x));
    return m;
  };
  for (const auto& c : d.chains)
    for (const auto& x : c.weights)
      if (x == Complex(0.0)) return std::nullopt;

  std::vector<bool> used(k, false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < k; ++i) {
    if (palindrome_condition(d.chains[i].weights, match_tol)) {
      used[i] = true;
      pairs.emplace_back(i, i);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (used[i]) continue;
    std::vector<double> rev = moduli(i);
    std::reverse(rev.begin(), rev.end());
    bool found = false;
    for (std::size_t j = i + 1; j < k && !found; ++j) {
      if (used[j] || d.chains[j].length() != d.chains[i].length()) continue;
      const std::vector<double> mj = moduli(j);
      bool same = true;
      for (std::size_t p = 0; p < mj.size(); ++p) same = same && detail::moduli_equal(mj[p], rev[p], match_tol);
      if (same) {
        used[i] = used[j] = true;
        pairs.emplace_back(i, j);
        found = true;
      }
    }
    if (!found) return std::nullopt;
  }

  auto gauge = [&](std::size_t i) {
    const auto& c = d.chains[i];
    std::vector<Complex> g{1.0};
    for (const auto& x : c.weights) g.push_back(g.back() * x / std::abs(x));
    return g;
  };
  const Index n = d.basis_change.rows();
  Matrix blocks = Matrix::Zero(n, n);
  for (const auto& [i, j] : pairs) {
    const auto gi = gauge(i);
    const auto gj = gauge(j);
    const Index len = d.chains[i].length();
    for (Index p = 0; p < len; ++p) {
      const Index q = len - 1 - p;
      const Complex x = gi[static_cast<std::size_t>(p)] * gj[static_cast<std::size_t>(q)];
      blocks(d.chains[i].offset + p, d.chains[j].offset + q) = x;
      blocks(d.chains[j].offset + q, d.chains[i].offset + p) = x;
    }
  }
  const Matrix a = d.basis_change * blocks * d.basis_change.transpose();
  try {
    Conjugation c = Conjugation::from_matrix(a, basis, tol);
    if (!verify_c_symmetry(t, c, tol).pass) return std::nullopt;
    return PairingCertificate{std::move(c), std::move(pairs)};
  } catch (const ConjugationError&) {
    return std::nullopt;
  }
}

}  // namespace cstree
