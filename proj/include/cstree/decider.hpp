#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "cstree/conjugation.hpp"
#include "cstree/core.hpp"
#include "cstree/shift.hpp"

namespace cstree {

struct DeciderOptions {
  double tol = kDefaultTol;            // certificate residual bound
  double rank_tol = kDefaultRankTol;   // relative singular-value cut
  int max_word_len = 8;
  int restarts = 64;
  std::uint64_t seed = 0;
  int gradient_iterations = 60;        // projected-gradient phase per restart
  int polish_iterations = 200;         // Levenberg-Marquardt phase per restart
};

// ---------------------------------------------------------------------------
// Obstructions

struct KernelWitness {
  int power = 0;
  std::size_t dim_ker = 0;
  std::size_t dim_ker_adjoint = 0;
};

enum class Letter { T, TStar };

struct WordWitness {
  std::vector<Letter> word;
  Complex trace;           // tr w(T, T*)
  Complex trace_reversed;  // tr w_rev(T, T*)
  double scale = 1.0;      // max(1, ||T||_F^len)
  double threshold = 0.0;  // 10 * tol * scale
};

struct EmptySpaceWitness {
  std::size_t dim = 0;
};

using Obstruction = std::variant<KernelWitness, WordWitness, EmptySpaceWitness>;

inline std::string word_to_string(const std::vector<Letter>& w) {
  std::string s;
  for (Letter l : w) s += (l == Letter::T ? "T" : "T*");
  return s;
}

inline std::vector<Letter> reversed(std::vector<Letter> w) {
  std::reverse(w.begin(), w.end());
  return w;
}

/// Product of the letters left to right, T* read as the adjoint.
inline Matrix evaluate_word(const Matrix& t, const std::vector<Letter>& w) {
  const Matrix ts = t.adjoint();
  Matrix p = Matrix::Identity(t.rows(), t.cols());
  for (Letter l : w) p = p * (l == Letter::T ? t : ts);
  return p;
}

/// Smallest m <= n with dim ker T^m != dim ker T*^m. A conjugation maps
/// ker T*^m onto ker T^m, so any such m rules out complex symmetry.
inline std::optional<KernelWitness> kernel_obstruction(const Matrix& t, double rank_tol = kDefaultRankTol) {
  const int n = static_cast<int>(t.rows());
  if (n == 0) return std::nullopt;
  const KernelTable table = kernel_table(t, n, rank_tol);
  for (const auto& row : table.rows) {
    if (row.dim_ker != row.dim_ker_adjoint) return KernelWitness{row.power, row.dim_ker, row.dim_ker_adjoint};
  }
  return std::nullopt;
}

/// If T = A T^T A* with A unitary then tr w(T,T*) = tr w_rev(T,T*) for
/// every word w. Words are scanned by length, then lexicographically with
/// T < T*; the first one whose two traces differ by more than
/// 10 * tol * max(1, ||T||_F^len) is returned.
inline std::optional<WordWitness> word_trace_obstruction(const Matrix& t, int max_len, double tol = kDefaultTol) {
  if (max_len < 2) throw InputError("word length bound must be >= 2");
  const double fro = t.norm();
  const Matrix ts = t.adjoint();
  const Index n = t.rows();
  // Word code: bit (len-1-i) is letter i, 1 = T*; increasing code is lex order.
  std::vector<Matrix> prefix{Matrix::Identity(n, n)};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Matrix> next;
    next.reserve(prefix.size() * 2);
    for (const Matrix& p : prefix) {
      next.push_back(p * t);
      next.push_back(p * ts);
    }
    prefix = std::move(next);
    const std::size_t count = prefix.size();
    std::vector<Complex> traces(count);
    for (std::size_t code = 0; code < count; ++code) traces[code] = prefix[code].trace();
    const double scale = std::max(1.0, std::pow(fro, len));
    const double threshold = 10.0 * tol * scale;
    for (std::size_t code = 0; code < count; ++code) {
      std::size_t rev = 0;
      for (int i = 0; i < len; ++i) {
        if (code & (std::size_t{1} << i)) rev |= std::size_t{1} << (len - 1 - i);
      }
      if (std::abs(traces[code] - traces[rev]) > threshold) {
        WordWitness w;
        for (int i = len - 1; i >= 0; --i) {
          w.word.push_back((code >> i) & 1U ? Letter::TStar : Letter::T);
        }
        w.trace = traces[code];
        w.trace_reversed = traces[rev];
        w.scale = scale;
        w.threshold = threshold;
        return w;
      }
    }
  }
  return std::nullopt;
}

/// Re-derives an obstruction from T alone, without reusing the search
/// path that produced it. True iff the witness still proves non-symmetry.
inline bool recheck_obstruction(const Matrix& t, const Obstruction& ob, const DeciderOptions& opt = {}) {
  return std::visit(
      [&](const auto& w) -> bool {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, KernelWitness>) {
          Matrix p = Matrix::Identity(t.rows(), t.cols());
          for (int m = 0; m < w.power; ++m) p = p * t;
          const auto n = static_cast<std::size_t>(t.rows());
          const Matrix pa = p.adjoint();
          const std::size_t a = n - numerical_rank(p, opt.rank_tol);
          const std::size_t b = n - numerical_rank(pa, opt.rank_tol);
          return a != b && a == w.dim_ker && b == w.dim_ker_adjoint;
        } else if constexpr (std::is_same_v<W, WordWitness>) {
          const Complex a = evaluate_word(t, w.word).trace();
          const Complex b = evaluate_word(t, reversed(w.word)).trace();
          const double scale = std::max(1.0, std::pow(t.norm(), static_cast<double>(w.word.size())));
          return std::abs(a - b) > 10.0 * opt.tol * scale;
        } else {
          return w.dim == 0;
        }
      },
      ob);
}

// ---------------------------------------------------------------------------
// Linearized problem: symmetric A with T A = A T^T.

struct SylvesterSpace {
  std::vector<Matrix> basis;  // Frobenius-orthonormal, each symmetric
  Index dim() const { return static_cast<Index>(basis.size()); }
};

/// Null space of A -> T A - A T^T on symmetric matrices. For symmetric A the
/// image is antisymmetric, so only entries above the diagonal are imposed;
/// unknowns are coordinates in the orthonormal basis {E_ii, (E_ij+E_ji)/sqrt2}.
inline SylvesterSpace sylvester_space(const Matrix& t, double rank_tol = kDefaultRankTol) {
  const Index n = t.rows();
  const Index unknowns = n * (n + 1) / 2;
  const Index equations = n * (n - 1) / 2;
  std::vector<std::pair<Index, Index>> slots;
  slots.reserve(static_cast<std::size_t>(unknowns));
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) slots.emplace_back(i, j);

  const double r2 = 1.0 / std::sqrt(2.0);
  auto unit = [&](Index k) {
    Matrix b = Matrix::Zero(n, n);
    const auto [i, j] = slots[static_cast<std::size_t>(k)];
    if (i == j) {
      b(i, i) = 1.0;
    } else {
      b(i, j) = r2;
      b(j, i) = r2;
    }
    return b;
  };

  Matrix map(equations, unknowns);
  const Matrix tt = t.transpose();
  for (Index k = 0; k < unknowns; ++k) {
    const auto [i, j] = slots[static_cast<std::size_t>(k)];
    // T B - B T^T for B = unit(k), using only the nonzero columns/rows of B.
    Matrix img = Matrix::Zero(n, n);
    const Complex v = (i == j) ? Complex(1.0) : Complex(r2);
    img.col(j) += v * t.col(i);
    img.row(i) -= v * tt.row(j);
    if (i != j) {
      img.col(i) += v * t.col(j);
      img.row(j) -= v * tt.row(i);
    }
    Index row = 0;
    for (Index a = 0; a < n; ++a)
      for (Index b = a + 1; b < n; ++b) map(row++, k) = img(a, b);
  }
  const Matrix kernel = null_space(map, rank_tol);
  SylvesterSpace space;
  for (Index c = 0; c < kernel.cols(); ++c) {
    Matrix b = Matrix::Zero(n, n);
    for (Index k = 0; k < unknowns; ++k) b += kernel(k, c) * unit(k);
    space.basis.push_back(std::move(b));
  }
  return space;
}

// ---------------------------------------------------------------------------
// Search for a unitary element of the space.

struct SearchResult {
  std::optional<Conjugation> certificate;
  double best_unitary_residual = std::numeric_limits<double>::infinity();
  int restarts_used = 0;
  int successful_restart = -1;
};

namespace detail {

inline Matrix combine(const SylvesterSpace& space, const Vector& c) {
  Matrix a = Matrix::Zero(space.basis.front().rows(), space.basis.front().cols());
  for (Index i = 0; i < space.dim(); ++i) a += c(i) * space.basis[static_cast<std::size_t>(i)];
  return a;
}

inline double unitarity_defect_sq(const Matrix& a) {
  return (a * a.adjoint() - Matrix::Identity(a.rows(), a.cols())).squaredNorm();
}

/// Projected gradient descent on f(c) = ||A(c)A(c)* - I||_F^2 restricted to
/// the sphere ||c|| = sqrt(n) (unitaries have ||A||_F^2 = n). Armijo
/// backtracking, step grows after each accepted move.
inline Vector gradient_phase(const SylvesterSpace& space, Vector c, int iterations) {
  const Index n = space.basis.front().rows();
  const double radius = std::sqrt(static_cast<double>(n));
  double step = 1.0 / static_cast<double>(n);
  Matrix a = combine(space, c);
  double f = unitarity_defect_sq(a);
  for (int it = 0; it < iterations && f > 1e-6; ++it) {
    const Matrix e = a * a.adjoint() - Matrix::Identity(n, n);
    const Matrix ea = e * a;
    Vector g(space.dim());
    for (Index i = 0; i < space.dim(); ++i) {
      g(i) = 4.0 * space.basis[static_cast<std::size_t>(i)].cwiseProduct(ea.conjugate()).sum();
      g(i) = std::conj(g(i));
    }
    // Remove the radial component (real inner product on C^d).
    g -= (c.dot(g).real() / c.squaredNorm()) * c;
    const double gn2 = g.squaredNorm();
    if (gn2 < 1e-30) break;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      Vector trial = c - step * g;
      trial *= radius / trial.norm();
      const Matrix ta = combine(space, trial);
      const double tf = unitarity_defect_sq(ta);
      if (tf <= f - 1e-4 * step * gn2) {
        c = std::move(trial);
        a = ta;
        f = tf;
        step *= 2.0;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return c;
}

/// Levenberg-Marquardt on the upper triangle of A A* - I, real
/// parameterization (Re c, Im c).
inline Vector polish_phase(const SylvesterSpace& space, Vector c, int iterations, double target) {
  const Index n = space.basis.front().rows();
  const Index d = space.dim();
  const Index m = n * (n + 1);  // real and imaginary parts of the upper triangle
  auto residual = [&](const Matrix& a) {
    const Matrix e = a * a.adjoint() - Matrix::Identity(n, n);
    Eigen::VectorXd r(m);
    Index k = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i; j < n; ++j) {
        r(k++) = e(i, j).real();
        r(k++) = e(i, j).imag();
      }
    return r;
  };
  Matrix a = combine(space, c);
  Eigen::VectorXd r = residual(a);
  double f = r.squaredNorm();
  double mu = 1e-3;
  Eigen::MatrixXd jac(m, 2 * d);
  const Complex iu(0.0, 1.0);
  for (int it = 0; it < iterations && std::sqrt(f) > target; ++it) {
    const Matrix as = a.adjoint();
    for (Index p = 0; p < d; ++p) {
      const Matrix& b = space.basis[static_cast<std::size_t>(p)];
      const Matrix ba = b * as;
      const Matrix de_re = ba + ba.adjoint();
      const Matrix de_im = iu * ba - iu * ba.adjoint();
      Index k = 0;
      for (Index i = 0; i < n; ++i)
        for (Index j = i; j < n; ++j) {
          jac(k, 2 * p) = de_re(i, j).real();
          jac(k, 2 * p + 1) = de_im(i, j).real();
          ++k;
          jac(k, 2 * p) = de_re(i, j).imag();
          jac(k, 2 * p + 1) = de_im(i, j).imag();
          ++k;
        }
    }
    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    bool improved = false;
    while (mu < 1e12) {
      Eigen::MatrixXd damped = h;
      damped.diagonal().array() += mu;
      const Eigen::VectorXd dx = damped.ldlt().solve(-grad);
      Vector trial = c;
      for (Index p = 0; p < d; ++p) trial(p) += Complex(dx(2 * p), dx(2 * p + 1));
      const Matrix ta = combine(space, trial);
      const Eigen::VectorXd tr = residual(ta);
      const double tf = tr.squaredNorm();
      if (tf < f) {
        c = std::move(trial);
        a = ta;
        r = tr;
        f = tf;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) break;
  }
  return c;
}

}  // namespace detail

/// Multi-start search for a symmetric unitary A in `space` with T A = A T^T.
/// Restart r draws its start from a generator seeded with (seed, r);
/// restarts run in index order and the first verified certificate wins,
/// so the result depends only on (space, T, options).
inline SearchResult unitary_search(const SylvesterSpace& space, const Matrix& t, const std::vector<VertexId>& basis,
                                   const DeciderOptions& opt) {
  SearchResult out;
  if (space.dim() == 0) return out;
  const Index n = t.rows();
  const double radius = std::sqrt(static_cast<double>(n));
  for (int r = 0; r < opt.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal;
    Vector c(space.dim());
    for (Index i = 0; i < c.size(); ++i) c(i) = Complex(normal(gen), normal(gen));
    c *= radius / c.norm();
    c = detail::gradient_phase(space, c, opt.gradient_iterations);
    c = detail::polish_phase(space, c, opt.polish_iterations, 1e-3 * opt.tol);
    out.restarts_used = r + 1;

    Matrix a = detail::combine(space, c);
    a = 0.5 * (a + a.transpose()).eval();
    const double defect = std::sqrt(detail::unitarity_defect_sq(a));
    out.best_unitary_residual = std::min(out.best_unitary_residual, defect);
    if (defect > opt.tol) continue;
    try {
      Conjugation cert = Conjugation::from_matrix(a, basis, opt.tol);
      if (!verify_c_symmetry(t, cert, opt.tol).pass) continue;
      out.certificate = std::move(cert);
      out.successful_restart = r;
      return out;
    } catch (const ConjugationError&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

enum class VerdictKind { cs, not_cs, undetermined };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::cs: return "cs";
    case VerdictKind::not_cs: return "not_cs";
    case VerdictKind::undetermined: return "undetermined";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::undetermined;
  std::optional<Conjugation> certificate;
  std::optional<Obstruction> obstruction;
  double symmetry_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t sylvester_dim = 0;
  double best_unitary_residual = std::numeric_limits<double>::quiet_NaN();
  int restarts_used = 0;
  DeciderOptions options;
  double elapsed_seconds = 0.0;  // not serialized; reports stay reproducible
};

/// kernel obstruction -> word-trace obstruction -> Sylvester space and
/// unitary search. CS only with a verified certificate, NotCS only with a
/// recomputable obstruction, Undetermined otherwise.
inline Verdict decide_cs(const Matrix& t, const std::vector<VertexId>& basis, const DeciderOptions& opt = {}) {
  if (t.rows() != t.cols()) throw std::invalid_argument("operator must be square");
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  v.options = opt;
  auto finish = [&](Verdict& out) -> Verdict {
    out.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };
  if (auto k = kernel_obstruction(t, opt.rank_tol)) {
    v.kind = VerdictKind::not_cs;
    v.obstruction = *k;
    return finish(v);
  }
  if (auto w = word_trace_obstruction(t, opt.max_word_len, opt.tol)) {
    v.kind = VerdictKind::not_cs;
    v.obstruction = *w;
    return finish(v);
  }
  const SylvesterSpace space = sylvester_space(t, opt.rank_tol);
  v.sylvester_dim = static_cast<std::size_t>(space.dim());
  if (space.dim() == 0) {
    v.kind = VerdictKind::not_cs;
    v.obstruction = EmptySpaceWitness{0};
    return finish(v);
  }
  SearchResult found = unitary_search(space, t, basis, opt);
  v.restarts_used = found.restarts_used;
  v.best_unitary_residual = found.best_unitary_residual;
  if (found.certificate) {
    v.kind = VerdictKind::cs;
    v.symmetry_residual = verify_c_symmetry(t, *found.certificate, opt.tol).residual;
    v.certificate = std::move(found.certificate);
  }
  return finish(v);
}

/// Independent re-verification of a verdict against T at tolerance `tol`.
inline bool recheck_verdict(const Matrix& t, const Verdict& v, double tol) {
  switch (v.kind) {
    case VerdictKind::cs: {
      if (!v.certificate) return false;
      const auto& c = *v.certificate;
      return c.unitary_residual() <= tol && c.symmetric_residual() <= tol && verify_c_symmetry(t, c, tol).pass;
    }
    case VerdictKind::not_cs: {
      if (!v.obstruction) return false;
      DeciderOptions o = v.options;
      o.tol = std::min(o.tol, tol);
      return recheck_obstruction(t, *v.obstruction, o);
    }
    case VerdictKind::undetermined:
      return false;
  }
  return false;
}

}  // namespace cstree
