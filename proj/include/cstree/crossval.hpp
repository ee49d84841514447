#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cstree/decider.hpp"
#include "cstree/families.hpp"
#include "cstree/shift.hpp"
#include "cstree/tree.hpp"

namespace cstree {

enum class Family { two_branch, binary };

inline const char* to_string(Family f) { return f == Family::two_branch ? "two-branch" : "binary"; }

inline Family parse_family(const std::string& s) {
  if (s == "two-branch" || s == "two_branch") return Family::two_branch;
  if (s == "binary") return Family::binary;
  throw InputError("unknown family '" + s + "' (expected two-branch or binary)");
}

/// One tree-and-weights instance of a family. theta is unused for binary.
struct FamilyInstance {
  Family family = Family::two_branch;
  int kappa = 0;
  int theta = 0;
  std::vector<Complex> weights;  // two-branch: trunk then branch; binary: per generation
  std::string sample_kind = "explicit";
};

struct CrossValGrid {
  Family family = Family::two_branch;
  int kappa_min = 0;
  int kappa_max = 0;
  int theta_min = 1;
  int theta_max = 1;
  std::optional<int> theta_offset;  // theta = kappa + offset, overrides the theta range
  int samples = 20;
  std::uint64_t seed = 0;
};

enum class PairingOutcome { cs, none, not_applicable };

inline const char* to_string(PairingOutcome p) {
  switch (p) {
    case PairingOutcome::cs: return "cs";
    case PairingOutcome::none: return "none";
    case PairingOutcome::not_applicable: return "not_applicable";
  }
  return "?";
}

struct PairingResult {
  PairingOutcome outcome = PairingOutcome::not_applicable;
  std::optional<Conjugation> certificate;
  double symmetry_residual = std::numeric_limits<double>::quiet_NaN();
  double decomposition_residual = std::numeric_limits<double>::quiet_NaN();
};

struct CrossValRecord {
  std::size_t index = 0;
  FamilyInstance instance;
  ConditionReport printed;
  Verdict decider;
  PairingResult pairing;
  bool agree = false;       // printed verdict matches a determined decider verdict
  bool certified = false;   // decider verdict re-verifies independently
  bool contradiction = false;  // pairing found CS while the decider says NotCS
};

struct CrossValSummary {
  std::size_t total = 0;
  std::size_t agree = 0;
  std::size_t disagree = 0;
  std::size_t certified_disagreements = 0;
  std::size_t undetermined = 0;
  std::size_t decider_cs = 0;
  std::size_t decider_not_cs = 0;
  std::size_t printed_satisfied = 0;
  std::size_t pairing_cs = 0;
  std::size_t contradictions = 0;
};

struct CrossValReport {
  Family family = Family::two_branch;
  std::optional<CrossValGrid> grid;
  DeciderOptions options;
  double condition_tol = 1e-8;
  std::vector<CrossValRecord> records;
  CrossValSummary summary;
};

namespace detail {

/// Union-find with multiplicative offsets: |l_a| = ratio(a, b) |l_b| inside a class.
class RatioClasses {
 public:
  explicit RatioClasses(std::size_t n) : parent_(n), log_ratio_(n, 0.0), size_(n, 1) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }

  std::size_t find(std::size_t a) {
    if (parent_[a] == a) return a;
    const std::size_t r = find(parent_[a]);
    log_ratio_[a] += log_ratio_[parent_[a]];
    parent_[a] = r;
    return r;
  }

  /// Imposes log|l_a| - log|l_b| = d; false if this contradicts earlier constraints.
  bool unite(std::size_t a, std::size_t b, double d) {
    const std::size_t ra = find(a);
    const std::size_t rb = find(b);
    if (ra == rb) return std::abs(log_ratio_[a] - log_ratio_[b] - d) < 1e-12;
    // log|l_a| = log_ratio_[a] + root_a, same for b.
    parent_[ra] = rb;
    log_ratio_[ra] = d + log_ratio_[b] - log_ratio_[a];
    size_[rb] += size_[ra];
    return true;
  }

  double log_offset(std::size_t a) {
    find(a);
    return log_ratio_[a];
  }
  std::size_t class_size(std::size_t a) { return size_[find(a)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<double> log_ratio_;
  std::vector<std::size_t> size_;
};

inline Complex random_phase(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, angle(rng));
}

/// Modulus constraints making the chains (l_{-kappa+1..0}, sqrt2 l_1, l_2..l_theta)
/// and (l_2..l_theta) palindromic. Flat position of l_i is i + kappa - 1.
/// Nothing if the constraints are inconsistent for this (kappa, theta).
inline std::optional<RatioClasses> two_branch_palindrome_classes(int kappa, int theta) {
  const auto n = static_cast<std::size_t>(kappa + theta);
  RatioClasses rc(n);
  auto pos = [&](int index) { return static_cast<std::size_t>(index + kappa - 1); };
  const double log_r2 = 0.5 * std::log(2.0);
  // f-chain entry p carries l_{-kappa+1+p}, scaled by sqrt2 at l_1.
  const int len = kappa + theta;
  for (int p = 0; p < len / 2; ++p) {
    const int a = -kappa + 1 + p;
    const int b = -kappa + 1 + (len - 1 - p);
    const double sa = a == 1 ? log_r2 : 0.0;
    const double sb = b == 1 ? log_r2 : 0.0;
    if (!rc.unite(pos(a), pos(b), sb - sa)) return std::nullopt;
  }
  for (int j = 2; j <= theta; ++j) {
    const int mirror = theta + 2 - j;
    if (!rc.unite(pos(j), pos(mirror), 0.0)) return std::nullopt;
  }
  return rc;
}

inline std::vector<Complex> random_weights(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mod(0.5, 2.0);
  std::vector<Complex> w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(mod(rng) * random_phase(rng));
  return w;
}

inline FamilyInstance two_branch_sample(int kappa, int theta, bool perturb, std::mt19937_64& rng) {
  FamilyInstance inst{Family::two_branch, kappa, theta, {}, perturb ? "perturbed" : "constructed"};
  auto classes = two_branch_palindrome_classes(kappa, theta);
  const auto n = static_cast<std::size_t>(kappa + theta);
  if (!classes) {
    inst.weights = random_weights(n, rng);
    inst.sample_kind = "random";
    return inst;
  }
  std::uniform_real_distribution<double> mod(0.5, 2.0);
  std::vector<double> base(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (classes->find(i) == i) base[i] = std::log(mod(rng));
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::exp(base[classes->find(i)] + classes->log_offset(i));
    inst.weights.push_back(m * random_phase(rng));
  }
  if (perturb) {
    std::vector<std::size_t> constrained;
    for (std::size_t i = 0; i < n; ++i)
      if (classes->class_size(i) >= 2) constrained.push_back(i);
    if (constrained.empty()) {
      inst.sample_kind = "perturbed_noop";
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, constrained.size() - 1);
      std::uniform_real_distribution<double> factor(1.3, 2.0);
      inst.weights[constrained[pick(rng)]] *= factor(rng);
    }
  }
  return inst;
}

inline FamilyInstance binary_sample(int kappa, bool equal_modulus, std::mt19937_64& rng) {
  FamilyInstance inst{Family::binary, kappa, 0, {}, equal_modulus ? "equal_modulus" : "random"};
  if (equal_modulus) {
    std::uniform_real_distribution<double> mod(0.5, 2.0);
    const double m = mod(rng);
    for (int k = 0; k < kappa; ++k) inst.weights.push_back(m * random_phase(rng));
  } else {
    inst.weights = random_weights(static_cast<std::size_t>(kappa), rng);
  }
  return inst;
}

inline std::size_t instance_dim(const FamilyInstance& inst) {
  if (inst.family == Family::two_branch) return static_cast<std::size_t>(inst.kappa + 2 * inst.theta + 1);
  return (std::size_t{1} << (inst.kappa + 1)) - 1;
}

}  // namespace detail

/// Instances of a grid in deterministic order: cells by (kappa, theta), then
/// samples alternating constructed/perturbed (two-branch) or
/// equal_modulus/random (binary). Sample s of a cell uses seed_seq{seed, kappa, theta, s}.
inline std::vector<FamilyInstance> grid_instances(const CrossValGrid& g) {
  if (g.samples < 0) throw InputError("samples must be >= 0");
  std::vector<FamilyInstance> out;
  for (int kappa = g.kappa_min; kappa <= g.kappa_max; ++kappa) {
    std::vector<int> thetas;
    if (g.family == Family::binary) {
      thetas.push_back(0);
    } else if (g.theta_offset) {
      thetas.push_back(kappa + *g.theta_offset);
    } else {
      for (int theta = g.theta_min; theta <= g.theta_max; ++theta) thetas.push_back(theta);
    }
    for (int theta : thetas) {
      if (g.family == Family::two_branch && (kappa < 0 || theta < 1)) continue;
      if (g.family == Family::binary && kappa < 2) continue;
      for (int s = 0; s < g.samples; ++s) {
        std::seed_seq seq{static_cast<std::uint32_t>(g.seed), static_cast<std::uint32_t>(g.seed >> 32),
                          static_cast<std::uint32_t>(kappa), static_cast<std::uint32_t>(theta),
                          static_cast<std::uint32_t>(s)};
        std::mt19937_64 rng(seq);
        const bool second_half = (s % 2) == 1;
        out.push_back(g.family == Family::two_branch ? detail::two_branch_sample(kappa, theta, second_half, rng)
                                                     : detail::binary_sample(kappa, !second_half, rng));
      }
    }
  }
  for (const auto& inst : out) {
    if (detail::instance_dim(inst) > 127) {
      throw InputError("grid instance kappa=" + std::to_string(inst.kappa) + " exceeds 127 x 127");
    }
  }
  return out;
}

inline DirectedTree instance_tree(const FamilyInstance& inst) {
  return inst.family == Family::two_branch ? generate_two_branch(inst.kappa, inst.theta) : generate_binary(inst.kappa);
}

inline WeightAssignment instance_assignment(const FamilyInstance& inst) {
  if (inst.family == Family::two_branch) return TwoBranchWeights::from_flat(inst.kappa, inst.theta, inst.weights).assignment();
  if (static_cast<int>(inst.weights.size()) != inst.kappa) {
    throw InputError("binary weights: expected " + std::to_string(inst.kappa) + " values, got " +
                     std::to_string(inst.weights.size()));
  }
  return BinaryWeights{inst.weights}.assignment();
}

inline ConditionReport printed_condition(const FamilyInstance& inst, double tol) {
  if (inst.family == Family::two_branch) {
    return two_branch_condition(TwoBranchWeights::from_flat(inst.kappa, inst.theta, inst.weights), tol);
  }
  return binary_condition(BinaryWeights{inst.weights}, tol);
}

inline PairingResult pairing_oracle(const DirectedTree& t, const WeightAssignment& w, const ShiftMatrix& s, double tol) {
  PairingResult r;
  BlockDecomposition d;
  try {
    d = decompose_equal_weight_tree(t, w);
  } catch (const InputError&) {
    return r;
  }
  r.decomposition_residual = d.residual;
  auto cert = reversal_pairing_cs(d, s.matrix, s.basis, tol);
  if (!cert) {
    r.outcome = PairingOutcome::none;
    return r;
  }
  r.outcome = PairingOutcome::cs;
  r.symmetry_residual = verify_c_symmetry(s.matrix, cert->conjugation, tol).residual;
  r.certificate = std::move(cert->conjugation);
  return r;
}

inline CrossValRecord cross_validate_one(const FamilyInstance& inst, std::size_t index, const DeciderOptions& opt,
                                         double condition_tol) {
  CrossValRecord rec;
  rec.index = index;
  rec.instance = inst;
  const DirectedTree t = instance_tree(inst);
  const WeightAssignment w = instance_assignment(inst);
  const ShiftMatrix s = build_shift(t, w);
  rec.printed = printed_condition(inst, condition_tol);
  rec.decider = decide_cs(s.matrix, s.basis, opt);
  rec.pairing = pairing_oracle(t, w, s, opt.tol);
  rec.certified = recheck_verdict(s.matrix, rec.decider, opt.tol);
  if (rec.decider.kind != VerdictKind::undetermined) {
    rec.agree = rec.printed.satisfied == (rec.decider.kind == VerdictKind::cs);
  }
  rec.contradiction = rec.pairing.outcome == PairingOutcome::cs && rec.decider.kind == VerdictKind::not_cs;
  return rec;
}

inline CrossValSummary summarize(const std::vector<CrossValRecord>& records) {
  CrossValSummary s;
  for (const auto& r : records) {
    ++s.total;
    const bool determined = r.decider.kind != VerdictKind::undetermined;
    if (!determined) ++s.undetermined;
    if (r.decider.kind == VerdictKind::cs) ++s.decider_cs;
    if (r.decider.kind == VerdictKind::not_cs) ++s.decider_not_cs;
    if (r.printed.satisfied) ++s.printed_satisfied;
    if (r.pairing.outcome == PairingOutcome::cs) ++s.pairing_cs;
    if (r.contradiction) ++s.contradictions;
    if (determined && r.agree) ++s.agree;
    if (determined && !r.agree) {
      ++s.disagree;
      if (r.certified) ++s.certified_disagreements;
    }
  }
  return s;
}

inline CrossValReport cross_validate(Family family, const std::vector<FamilyInstance>& instances,
                                     const DeciderOptions& opt = {}, double condition_tol = 1e-8) {
  CrossValReport rep;
  rep.family = family;
  rep.options = opt;
  rep.condition_tol = condition_tol;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].family != family) throw InputError("instance family does not match the report family");
    rep.records.push_back(cross_validate_one(instances[i], i, opt, condition_tol));
  }
  rep.summary = summarize(rep.records);
  return rep;
}

inline CrossValReport cross_validate(const CrossValGrid& grid, const DeciderOptions& opt = {},
                                     double condition_tol = 1e-8) {
  CrossValReport rep = cross_validate(grid.family, grid_instances(grid), opt, condition_tol);
  rep.grid = grid;
  return rep;
}

}  // namespace cstree
