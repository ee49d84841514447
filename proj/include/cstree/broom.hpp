#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cstree/core.hpp"
#include "cstree/shift.hpp"
#include "cstree/tree.hpp"

namespace cstree {

/// 113-bit significand. The h-vectors have squared norms up to ~1/lambda^2,
/// so absolute Gram residuals near 1e-9 need more than double precision.
using Quad = boost::multiprecision::cpp_bin_float_quad;

/// Tooth weights lambda_1..lambda_N of a broom, each in (0, 1).
struct BroomSchedule {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }

  void validate() const {
    if (weights.empty()) throw InputError("broom schedule needs at least one weight");
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double w = weights[i];
      if (!(w > 0.0 && w < 1.0)) {
        throw InputError("broom weight lambda_" + std::to_string(i + 1) + " = " + std::to_string(w) +
                         " is outside (0, 1)");
      }
    }
  }
};

/// The induction cannot continue: the Gram matrix lost definiteness or the
/// new vector would need s^2 <= 0.
class InfeasibleStep : public std::runtime_error {
 public:
  InfeasibleStep(std::size_t step_, double deficit_, const std::string& why)
      : std::runtime_error("broom induction infeasible at step " + std::to_string(step_) + ": " + why +
                           " (deficit " + std::to_string(deficit_) + ")"),
        step(step_),
        deficit(deficit_) {}
  std::size_t step;
  double deficit;
};

namespace detail {

/// Cholesky solve of a small dense SPD system; nothing if not positive definite.
template <class Real>
std::optional<std::vector<Real>> cholesky_solve(std::vector<std::vector<Real>> a, std::vector<Real> b) {
  using std::sqrt;
  const std::size_t n = b.size();
  for (std::size_t j = 0; j < n; ++j) {
    Real d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > 0)) return std::nullopt;
    a[j][j] = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      Real v = a[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * a[j][k];
      a[i][j] = v / a[j][j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  return b;
}

template <class Real>
Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += a[i] * b[i];
  return s;
}

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

}  // namespace detail

/// Vectors h_1..h_N in coordinates over an abstract orthonormal family
/// f_1..f_N, with ||h_i||^2 = (1 - l_i^2)/l_i^2 and <h_i, h_j> = -1.
template <class Real = Quad>
struct HSequence {
  std::vector<double> weights;
  std::vector<std::vector<Real>> coords;  // coords[i][k] = <h_{i+1}, f_{k+1}>, zero for k > i
  std::vector<std::vector<Real>> t;       // t[i] = (t_{i+1,1}, ..., t_{i+1,i})
  std::vector<Real> s;                    // s[i] = s_{i+1}, coefficient of f_{i+1} in h_{i+1}

  std::size_t size() const { return coords.size(); }

  Real target_norm_sq(std::size_t i) const {
    const Real l = weights[i];
    return (1 - l * l) / (l * l);
  }
  Real inner(std::size_t i, std::size_t j) const { return detail::dot(coords[i], coords[j]); }

  std::vector<std::vector<Real>> gram() const {
    std::vector<std::vector<Real>> g(size(), std::vector<Real>(size()));
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) g[i][j] = inner(i, j);
    return g;
  }

  /// max over i != j of |<h_i, h_j> + 1|.
  double max_gram_residual() const {
    Real worst = 0;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) {
        if (i == j) continue;
        Real r = inner(i, j) + 1;
        if (r < 0) r = -r;
        if (r > worst) worst = r;
      }
    return detail::to_double(worst);
  }

  /// max over i of |‖h_i‖^2 - (1 - l_i^2)/l_i^2|.
  double max_norm_residual() const {
    Real worst = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      Real r = inner(i, i) - target_norm_sq(i);
      if (r < 0) r = -r;
      if (r > worst) worst = r;
    }
    return detail::to_double(worst);
  }
};

/// Inductive construction h_{n+1} = sum_j t_{n+1,j} h_j + s_{n+1} f_{n+1}.
/// The t's solve G t = -1 with G the Gram matrix of h_1..h_n (diagonal
/// (1 - l_i^2)/l_i^2, off-diagonal -1), and
/// s_{n+1}^2 = (1 - l_{n+1}^2)/l_{n+1}^2 - t^T G t must be positive.
template <class Real = Quad>
HSequence<Real> solve_h_sequence(const BroomSchedule& schedule) {
  using std::sqrt;
  schedule.validate();
  const std::size_t n = schedule.size();
  HSequence<Real> h;
  h.weights = schedule.weights;
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<std::vector<Real>> g(step, std::vector<Real>(step, Real(-1)));
    for (std::size_t i = 0; i < step; ++i) g[i][i] = h.target_norm_sq(i);
    std::vector<Real> t;
    Real quad = 0;
    if (step > 0) {
      auto solved = detail::cholesky_solve(g, std::vector<Real>(step, Real(-1)));
      if (!solved) throw InfeasibleStep(step + 1, 0.0, "Gram matrix of h_1..h_n is not positive definite");
      t = std::move(*solved);
      for (std::size_t i = 0; i < step; ++i)
        for (std::size_t j = 0; j < step; ++j) quad += t[i] * g[i][j] * t[j];
    }
    const Real s2 = h.target_norm_sq(step) - quad;
    if (!(s2 > 0)) throw InfeasibleStep(step + 1, -detail::to_double(s2), "s^2 <= 0");
    const Real s = sqrt(s2);
    std::vector<Real> c(n, Real(0));
    for (std::size_t j = 0; j < step; ++j)
      for (std::size_t k = 0; k < n; ++k) c[k] += t[j] * h.coords[j][k];
    c[step] = s;
    h.coords.push_back(std::move(c));
    h.t.push_back(std::move(t));
    h.s.push_back(s);
  }
  return h;
}

struct BroomCheck {
  double tol = 0.0;
  double norm_residual = 0.0;          // max_i |‖C e_i‖ - 1|, i = 0..N
  double orthogonality_residual = 0.0; // max_{i != j} |<C e_i, C e_j>|, includes f_0
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  double h_orthogonality_to_f0 = 0.0;  // max_i |<h_i, f_0>|
  std::vector<double> intertwining;    // ‖(S C - C S*) e_j‖, j = 0..N
  bool pass = false;
};

/// Images C e_0 = f_0 and C e_i = g_i = l_i (e_0 + h_i) in a broom with
/// M >= 2N+1 teeth. Teeth N+1..M share the weight that brings sum l^2 to 1,
/// so that S e_0 = f_0. The frame f_1..f_N is Gram-Schmidt of e_{N+1..M}
/// against f_0. Vectors have M+1 entries, index 0 is the root.
template <class Real = Quad>
struct BroomConjugation {
  std::size_t teeth = 0;
  double tail_weight = 0.0;
  std::vector<Real> weights;                 // tooth weights, index 0 unused
  std::vector<Real> f0;
  std::vector<std::vector<Real>> frame;      // f_1..f_N
  std::vector<std::vector<Real>> images;     // C e_0, ..., C e_N
  BroomCheck check;
};

template <class Real = Quad>
BroomConjugation<Real> build_broom_conjugation(const BroomSchedule& schedule, const HSequence<Real>& h,
                                               std::size_t teeth, double tol = 1e-8) {
  using std::sqrt;
  schedule.validate();
  const std::size_t n = schedule.size();
  if (h.size() != n) throw InputError("h-sequence length does not match the schedule");
  if (teeth < 2 * n + 1) {
    throw InputError("broom needs at least 2N+1 = " + std::to_string(2 * n + 1) + " teeth, got " +
                     std::to_string(teeth));
  }
  Real head = 0;
  for (double w : schedule.weights) head += Real(w) * Real(w);
  if (!(head < 1)) throw InputError("sum of squared weights must be < 1 to complete the broom");
  BroomConjugation<Real> out;
  out.teeth = teeth;
  const Real tail = sqrt((1 - head) / Real(teeth - n));
  out.tail_weight = detail::to_double(tail);
  out.weights.assign(teeth + 1, Real(0));
  for (std::size_t k = 1; k <= teeth; ++k) out.weights[k] = k <= n ? Real(schedule.weights[k - 1]) : tail;

  const std::size_t dim = teeth + 1;
  out.f0 = out.weights;  // S e_0, unit norm by the choice of tail

  // f_1..f_N: modified Gram-Schmidt of e_{N+1}, ... against f_0.
  std::vector<std::vector<Real>> accepted{out.f0};
  for (std::size_t k = n + 1; k <= teeth && out.frame.size() < n; ++k) {
    std::vector<Real> v(dim, Real(0));
    v[k] = 1;
    for (const auto& q : accepted) {
      const Real c = detail::dot(q, v);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= c * q[i];
    }
    const Real norm = sqrt(detail::dot(v, v));
    if (norm < Real(1e-8)) continue;
    for (auto& x : v) x /= norm;
    accepted.push_back(v);
    out.frame.push_back(v);
  }
  if (out.frame.size() < n) throw InputError("could not build N orthonormal frame vectors");

  out.images.push_back(out.f0);
  std::vector<std::vector<Real>> hvec;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Real> hv(dim, Real(0));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t e = 0; e < dim; ++e) hv[e] += h.coords[i][k] * out.frame[k][e];
    const Real l = schedule.weights[i];
    std::vector<Real> g(dim);
    for (std::size_t e = 0; e < dim; ++e) g[e] = l * hv[e];
    g[0] += l;
    hvec.push_back(std::move(hv));
    out.images.push_back(std::move(g));
  }

  auto absd = [](const Real& x) { return detail::to_double(x < 0 ? Real(-x) : x); };
  BroomCheck& chk = out.check;
  chk.tol = tol;
  for (std::size_t i = 0; i <= n; ++i) {
    chk.norm_residual = std::max(chk.norm_residual, absd(sqrt(detail::dot(out.images[i], out.images[i])) - 1));
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double r = absd(detail::dot(out.images[i], out.images[j]));
      if (r >= chk.orthogonality_residual) {
        chk.orthogonality_residual = r;
        chk.worst_pair = {i, j};
      }
    }
  }
  for (const auto& hv : hvec) chk.h_orthogonality_to_f0 = std::max(chk.h_orthogonality_to_f0, absd(detail::dot(hv, out.f0)));

  // (S x)_k = l_k x_0 for k >= 1; S* e_0 = 0, S* e_j = l_j e_0, C(l_j e_0) = l_j f_0.
  for (std::size_t j = 0; j <= n; ++j) {
    const auto& img = out.images[j];
    Real acc = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      Real sc = k == 0 ? Real(0) : out.weights[k] * img[0];
      Real cs = j == 0 ? Real(0) : Real(schedule.weights[j - 1]) * out.f0[k];
      acc += (sc - cs) * (sc - cs);
    }
    chk.intertwining.push_back(detail::to_double(sqrt(acc)));
  }
  chk.pass = chk.norm_residual <= tol && chk.orthogonality_residual <= tol && chk.h_orthogonality_to_f0 <= tol;
  for (double r : chk.intertwining) chk.pass = chk.pass && r <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// Two-level broom: kernels of S and S* on the finite truncation.

struct TwoLevelReport {
  int teeth = 0;
  std::size_t dim_ker = 0;
  std::size_t dim_ker_adjoint = 0;
  double ker_distance = 0.0;           // ker S    vs H_2
  double ker_adjoint_distance = 0.0;   // ker S*   vs C e_0 + (H_1 - C f_1)
  double ker_perp_distance = 0.0;      // ker S^perp  vs C e_0 + (H_1 - C f_1) + C f_1
  double ker_adjoint_perp_distance = 0.0;  // ker S*^perp vs C f_1 + H_2
  double tol = 0.0;
  bool pass = false;
};

/// Compares the numerically computed kernels of S, S* on the two-level broom
/// with the subspaces built from H_1 = span{e_{1,j}}, H_2 = span{e_{2,j}} and
/// f_1 = sum_i l_{1,i} e_{1,i} / ‖.‖.
inline TwoLevelReport two_level_kernel_structure(const std::vector<Complex>& first, const std::vector<Complex>& second,
                                                 double tol = 1e-10, double rank_tol = kDefaultRankTol) {
  const int teeth = static_cast<int>(first.size());
  if (teeth < 1 || second.size() != first.size()) throw InputError("need N >= 1 weights on each level");
  for (const auto& w : first)
    if (w == Complex(0.0)) throw InputError("zero weight on the first level");
  for (const auto& w : second)
    if (w == Complex(0.0)) throw InputError("zero weight on the second level");
  const DirectedTree t = generate_two_level_broom(teeth);
  WeightAssignment wa;
  for (int j = 1; j <= teeth; ++j) {
    wa[detail::coord(1, j)] = first[static_cast<std::size_t>(j - 1)];
    wa[detail::coord(2, j)] = second[static_cast<std::size_t>(j - 1)];
  }
  const Matrix s = build_shift(t, wa).matrix;
  const auto n = static_cast<Index>(t.size());
  auto e = [&](const VertexId& v) {
    Vector x = Vector::Zero(n);
    x(static_cast<Index>(t.index_of(v))) = 1.0;
    return x;
  };
  Matrix h1(n, teeth), h2(n, teeth);
  Vector f1 = Vector::Zero(n);
  for (int j = 1; j <= teeth; ++j) {
    h1.col(j - 1) = e(detail::coord(1, j));
    h2.col(j - 1) = e(detail::coord(2, j));
    f1 += first[static_cast<std::size_t>(j - 1)] * e(detail::coord(1, j));
  }
  f1.normalize();
  const Vector e0 = e("0");
  const Matrix h1_minus_f1 = range_space(h1 - f1 * (f1.adjoint() * h1), 1e-8);

  auto stack = [&](std::initializer_list<Matrix> parts) {
    Index cols = 0;
    for (const auto& p : parts) cols += p.cols();
    Matrix m(n, cols);
    Index c = 0;
    for (const auto& p : parts) {
      m.middleCols(c, p.cols()) = p;
      c += p.cols();
    }
    return m;
  };
  const Matrix expect_ker = h2;
  const Matrix expect_ker_adj = stack({e0, h1_minus_f1});
  const Matrix expect_ker_perp = stack({e0, h1_minus_f1, f1});
  const Matrix expect_ker_adj_perp = stack({f1, h2});

  const Matrix ker = null_space(s, rank_tol);
  const Matrix sa = s.adjoint();
  const Matrix ker_adj = null_space(sa, rank_tol);
  TwoLevelReport r;
  r.teeth = teeth;
  r.tol = tol;
  r.dim_ker = static_cast<std::size_t>(ker.cols());
  r.dim_ker_adjoint = static_cast<std::size_t>(ker_adj.cols());
  r.ker_distance = subspace_distance(ker, expect_ker);
  r.ker_adjoint_distance = subspace_distance(ker_adj, expect_ker_adj);
  r.ker_perp_distance = subspace_distance(orthogonal_complement(ker, n), expect_ker_perp);
  r.ker_adjoint_perp_distance = subspace_distance(orthogonal_complement(ker_adj, n), expect_ker_adj_perp);
  r.pass = r.ker_distance <= tol && r.ker_adjoint_distance <= tol && r.ker_perp_distance <= tol &&
           r.ker_adjoint_perp_distance <= tol;
  return r;
}

}  // namespace cstree
