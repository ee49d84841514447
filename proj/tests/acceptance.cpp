// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "cstree/cstree.hpp"
#include "cstree/io.hpp"

using namespace cstree;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 7;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

DirectedTree fork_tree() {
  return DirectedTree(TreeSpec{{"0", "1,1", "2,1", "2,2"}, "0", {{"0", "1,1"}, {"0", "2,1"}, {"2,1", "2,2"}}});
}

DirectedTree stem_fork_tree() {
  return DirectedTree(
      TreeSpec{{"-1", "0", "1,1", "2,1", "2,2"}, "-1", {{"-1", "0"}, {"0", "1,1"}, {"0", "2,1"}, {"2,1", "2,2"}}});
}

Vector unit(const DirectedTree& t, const char* v) {
  Vector e = Vector::Zero(static_cast<Index>(t.size()));
  e(static_cast<Index>(t.index_of(v))) = 1.0;
  return e;
}

void criterion_1() {
  const DirectedTree t = fork_tree();
  const ShiftMatrix s = build_shift(t, {{"1,1", 1.0}, {"2,1", 1.0}, {"2,2", std::sqrt(2.0)}});
  const double r = 1.0 / std::sqrt(2.0);
  const Conjugation c = from_basis_images(
      std::vector<std::pair<VertexId, Vector>>{{"0", unit(t, "2,2")},
                                               {"2,2", unit(t, "0")},
                                               {"1,1", r * (unit(t, "2,1") - unit(t, "1,1"))},
                                               {"2,1", r * (unit(t, "1,1") + unit(t, "2,1"))}},
      t.vertices());
  const double printed = verify_c_symmetry(s.matrix, c).residual;
  const Verdict v = decide_cs(s.matrix, s.basis);
  const bool ok = printed <= 1e-12 && v.kind == VerdictKind::cs && recheck_verdict(s.matrix, v, 1e-10);
  report(1, ok,
         "printed conjugation residual " + num(printed) + "; decider " + to_string(v.kind) + ", certificate residual " +
             num(v.symmetry_residual));
}

void criterion_2() {
  const DirectedTree t = stem_fork_tree();
  const ShiftMatrix s = build_shift(t, {{"0", 1.0}, {"1,1", 1.0}, {"2,1", 1.0}, {"2,2", 1.0}});
  const KernelTable k = kernel_table(s.matrix, 2);
  const auto& row = k.rows.at(1);
  const Verdict v = decide_cs(s.matrix, s.basis);
  const bool kernel_kind = v.obstruction && std::holds_alternative<KernelWitness>(*v.obstruction);
  const bool ok = row.dim_ker == 3 && row.dim_ker_adjoint == 4 && v.kind == VerdictKind::not_cs && kernel_kind;
  std::string how = "none";
  if (v.obstruction) how = io::to_json(*v.obstruction)["kind"].get<std::string>();
  report(2, ok,
         "m=2 dims (" + std::to_string(row.dim_ker) + "," + std::to_string(row.dim_ker_adjoint) +
             ") expected (3,4); decider " + to_string(v.kind) + " via " + how +
             (recheck_verdict(s.matrix, v, 1e-10) ? " (re-verified)" : " (not re-verified)") +
             "; dim ker T^m = dim ker T*^m for every square T, so a kernel obstruction cannot occur");
}

std::size_t ker_closed_form(int kappa, int theta, int m) {
  std::size_t d = 0;
  for (int j = theta - m + 1; j <= theta; ++j) d += j >= 1 ? 2 : (j >= -kappa ? 1 : 0);
  return d;
}

std::size_t ker_adjoint_closed_form(int kappa, int theta, int m) {
  return static_cast<std::size_t>(std::min(m, kappa + theta + 1) + std::min(m, theta));
}

void criterion_3() {
  int checked = 0;
  int mismatches = 0;
  for (int kappa = 0; kappa <= 3; ++kappa)
    for (int theta = 1; theta <= 4; ++theta) {
      const DirectedTree t = generate_two_branch(kappa, theta);
      std::vector<Complex> gen;
      for (int d = 1; d <= kappa + theta; ++d) gen.emplace_back(0.4 + 0.3 * d);
      const KernelTable k = kernel_table(build_shift(t, generation_weights(t, gen)).matrix, kappa + theta + 1);
      for (const auto& r : k.rows) {
        ++checked;
        if (r.dim_ker != ker_closed_form(kappa, theta, r.power) ||
            r.dim_ker_adjoint != ker_adjoint_closed_form(kappa, theta, r.power)) {
          ++mismatches;
        }
      }
    }
  report(3, mismatches == 0, std::to_string(checked) + " (kappa, theta, m) rows, " + std::to_string(mismatches) + " mismatches");
}

CrossValReport theta_kappa_one_grid() {
  CrossValGrid g;
  g.family = Family::two_branch;
  g.kappa_min = 0;
  g.kappa_max = 3;
  g.theta_offset = 1;
  g.samples = 20;
  g.seed = kSeed;
  return cross_validate(g, DeciderOptions{}, 1e-8);
}

void criterion_4_5(const CrossValReport& rep) {
  std::size_t certified = 0;
  for (const auto& r : rep.records) certified += r.certified ? 1 : 0;
  const auto& s = rep.summary;
  report(4, s.total == 80 && s.agree == s.total && certified == s.total && s.contradictions == 0,
         std::to_string(s.agree) + "/" + std::to_string(s.total) + " agree, " + std::to_string(certified) +
             " certified, " + std::to_string(s.decider_cs) + " cs / " + std::to_string(s.decider_not_cs) + " not_cs, " +
             std::to_string(s.undetermined) + " undetermined");

  std::size_t satisfying = 0;
  std::size_t built = 0;
  double worst = 0.0;
  for (const auto& r : rep.records) {
    if (!r.printed.satisfied) continue;
    ++satisfying;
    try {
      const auto w = TwoBranchWeights::from_flat(r.instance.kappa, r.instance.theta, r.instance.weights);
      const Conjugation c = two_branch_conjugation(w, 1e-10);
      const ShiftMatrix sm = build_shift(generate_two_branch(r.instance.kappa, r.instance.theta), w.assignment());
      const double res = verify_c_symmetry(sm.matrix, c, 1e-10).residual;
      worst = std::max(worst, res);
      if (res <= 1e-10) ++built;
    } catch (const std::exception&) {
    }
  }
  report(5, satisfying > 0 && built == satisfying,
         std::to_string(built) + "/" + std::to_string(satisfying) + " satisfying instances, worst residual " + num(worst));
}

struct FuzzResult {
  json verdicts = json::array();
  int cs = 0, not_cs = 0, undetermined = 0, unverified = 0, pairing_applicable = 0, contradictions = 0;
};

FuzzResult soundness_fuzz() {
  FuzzResult out;
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> mod(0.3, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 15);
    TreeSpec spec{{}, "0", {}};
    for (int i = 0; i < n; ++i) spec.vertices.push_back(std::to_string(i));
    for (int i = 1; i < n; ++i) spec.edges.push_back({std::to_string(rng() % static_cast<unsigned>(i)), std::to_string(i)});
    const DirectedTree t(spec);
    // Odd trials draw one weight per generation so that some instances are CS.
    std::vector<Complex> gen;
    for (std::size_t d = 0; d < t.depth(); ++d) gen.push_back(std::polar(mod(rng), angle(rng)));
    WeightAssignment w;
    for (std::size_t v = 0; v < t.size(); ++v) {
      if (v == t.root_index()) continue;
      w[t.label(v)] = trial % 2 == 1 ? gen[t.depth_of(v) - 1] : std::polar(mod(rng), angle(rng));
    }
    const ShiftMatrix s = build_shift(t, w);
    DeciderOptions opt;
    opt.seed = kSeed + static_cast<std::uint64_t>(trial);
    const Verdict v = decide_cs(s.matrix, s.basis, opt);
    out.verdicts.push_back(io::to_json(v));
    switch (v.kind) {
      case VerdictKind::cs: ++out.cs; break;
      case VerdictKind::not_cs: ++out.not_cs; break;
      case VerdictKind::undetermined: ++out.undetermined; break;
    }
    if (v.kind != VerdictKind::undetermined && !recheck_verdict(s.matrix, v, 1e-8)) ++out.unverified;
    const PairingResult p = pairing_oracle(t, w, s, 1e-10);
    if (p.outcome != PairingOutcome::not_applicable) ++out.pairing_applicable;
    if (p.outcome == PairingOutcome::cs && v.kind == VerdictKind::not_cs) ++out.contradictions;
  }
  return out;
}

void criterion_6(const FuzzResult& f) {
  report(6, f.unverified == 0 && f.contradictions == 0,
         "200 trees: " + std::to_string(f.cs) + " cs, " + std::to_string(f.not_cs) + " not_cs, " +
             std::to_string(f.undetermined) + " undetermined; " + std::to_string(f.unverified) + " failed re-verification; " +
             std::to_string(f.pairing_applicable) + " with pairing oracle, " + std::to_string(f.contradictions) +
             " contradictions");
}

void criterion_7() {
  const DirectedTree t = generate_path(3);
  const ShiftMatrix a = build_shift(t, {{"1", 1.0}, {"2", 2.0}});
  const Verdict va = decide_cs(a.matrix, a.basis);
  bool traces_ok = false;
  std::string word = "none";
  if (va.obstruction && std::holds_alternative<WordWitness>(*va.obstruction)) {
    const auto& w = std::get<WordWitness>(*va.obstruction);
    word = word_to_string(w.word) + " " + num(w.trace.real()) + " vs " + num(w.trace_reversed.real());
    const double lo = std::min(w.trace.real(), w.trace_reversed.real());
    const double hi = std::max(w.trace.real(), w.trace_reversed.real());
    traces_ok = std::abs(lo - 4.0) <= 1e-12 && std::abs(hi - 16.0) <= 1e-12 && std::abs(w.trace.imag()) <= 1e-12 &&
                std::abs(w.trace_reversed.imag()) <= 1e-12;
  }
  const std::vector<Letter> documented{Letter::TStar, Letter::T, Letter::TStar, Letter::T, Letter::T, Letter::TStar};
  const Complex d1 = evaluate_word(a.matrix, documented).trace();
  const Complex d2 = evaluate_word(a.matrix, reversed(documented)).trace();
  const bool documented_ok = std::abs(d1 - Complex(16.0)) <= 1e-12 && std::abs(d2 - Complex(4.0)) <= 1e-12;

  const ShiftMatrix b = build_shift(t, {{"1", 1.0}, {"2", 1.0}});
  const Verdict vb = decide_cs(b.matrix, b.basis);
  const bool ok = va.kind == VerdictKind::not_cs && traces_ok && documented_ok && vb.kind == VerdictKind::cs &&
                  recheck_verdict(b.matrix, vb, 1e-10);
  report(7, ok,
         "weights (1,2): " + std::string(to_string(va.kind)) + " via " + word + "; T*TT*TTT* gives " + num(d1.real()) +
             " vs " + num(d2.real()) + "; weights (1,1): " + to_string(vb.kind));
}

json audit_reports() {
  json out;
  const std::vector<FamilyInstance> clause_three{
      {Family::two_branch, 0, 2, {1.0, std::sqrt(2.0)}, "explicit"}};
  CrossValGrid general;
  general.family = Family::two_branch;
  general.kappa_min = 0;
  general.kappa_max = 2;
  general.theta_min = 1;
  general.theta_max = 3;
  general.samples = 4;
  general.seed = kSeed;
  out["clause_three_instance"] = io::to_json(cross_validate(Family::two_branch, clause_three));
  out["two_branch_general_grid"] = io::to_json(cross_validate(general));
  out["binary_unit"] = io::to_json(cross_validate(Family::binary, {{Family::binary, 2, 0, {1.0, 1.0}, "explicit"}}));
  return out;
}

void criterion_8(const json& reports) {
  std::size_t disagreements = 0;
  std::size_t double_certified = 0;
  std::size_t contradictions = 0;
  std::size_t undetermined = 0;
  for (const auto& [name, rep] : reports.items()) {
    contradictions += rep["summary"]["contradictions"].get<std::size_t>();
    undetermined += rep["summary"]["undetermined"].get<std::size_t>();
    for (const auto& idx : rep["disagreements"]) {
      ++disagreements;
      const json& rec = rep["records"][idx.get<std::size_t>()];
      const bool certified = rec["certified"].get<bool>();
      const bool pairing_consistent =
          rec["pairing"]["outcome"] != "cs" || rec["decider"]["verdict"] == "cs";
      if (certified && pairing_consistent) ++double_certified;
    }
  }
  const auto& c3 = reports["clause_three_instance"]["records"][0];
  const auto& bin = reports["binary_unit"]["records"][0];
  report(8, disagreements == double_certified && contradictions == 0,
         std::to_string(disagreements) + " disagreements, " + std::to_string(double_certified) + " double-certified, " +
             std::to_string(undetermined) + " undetermined; kappa=0 theta=2 (1,sqrt2): printed " +
             (c3["printed_condition"]["satisfied"].get<bool>() ? "satisfied" : "not satisfied") + ", decider " +
             c3["decider"]["verdict"].get<std::string>() + "; binary(2) (1,1): printed " +
             (bin["printed_condition"]["satisfied"].get<bool>() ? "satisfied" : "not satisfied") + ", decider " +
             bin["decider"]["verdict"].get<std::string>());
}

void criterion_9() {
  BroomSchedule s;
  for (int i = 1; i <= 6; ++i) s.weights.push_back(std::pow(10.0, -i));
  try {
    const auto h = solve_h_sequence(s);
    const auto c = build_broom_conjugation(s, h, 13, 1e-8);
    double worst_intertwining = 0.0;
    for (double r : c.check.intertwining) worst_intertwining = std::max(worst_intertwining, r);
    const bool ok = h.max_gram_residual() <= 1e-9 && h.max_norm_residual() <= 1e-9 && c.check.norm_residual <= 1e-9 &&
                    c.check.orthogonality_residual <= 1e-9 && worst_intertwining <= 1e-8 &&
                    c.check.intertwining.size() == 7;
    report(9, ok,
           "gram " + num(h.max_gram_residual()) + ", norms " + num(h.max_norm_residual()) + ", {g_i} orthonormality " +
               num(std::max(c.check.norm_residual, c.check.orthogonality_residual)) + ", intertwining " +
               num(worst_intertwining));
  } catch (const std::exception& e) {
    report(9, false, e.what());
  }
}

void criterion_10() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> w(0.2, 2.0);
  double worst = 0.0;
  int runs = 0;
  bool ok = true;
  for (int n = 1; n <= 5; ++n)
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Complex> a, b;
      for (int i = 0; i < n; ++i) {
        a.emplace_back(w(rng));
        b.emplace_back(w(rng));
      }
      const TwoLevelReport r = two_level_kernel_structure(a, b, 1e-10);
      ++runs;
      ok = ok && r.pass;
      worst = std::max({worst, r.ker_distance, r.ker_adjoint_distance, r.ker_perp_distance, r.ker_adjoint_perp_distance});
    }
  report(10, ok, std::to_string(runs) + " brooms with N=1..5, worst subspace distance " + num(worst));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  const CrossValReport grid = theta_kappa_one_grid();
  criterion_4_5(grid);
  const FuzzResult fuzz = soundness_fuzz();
  criterion_6(fuzz);
  criterion_7();
  const json audit = audit_reports();
  criterion_8(audit);
  criterion_9();
  criterion_10();

  const bool same4 = io::dump(io::to_json(grid)) == io::dump(io::to_json(theta_kappa_one_grid()));
  const bool same6 = io::dump(fuzz.verdicts) == io::dump(soundness_fuzz().verdicts);
  const bool same8 = io::dump(audit) == io::dump(audit_reports());
  report(11, same4 && same6 && same8,
         std::string("criterion 4 report ") + (same4 ? "identical" : "differs") + ", criterion 6 verdicts " +
             (same6 ? "identical" : "differ") + ", criterion 8 reports " + (same8 ? "identical" : "differ"));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << " ("
            << num(secs) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
