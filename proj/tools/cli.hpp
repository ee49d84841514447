#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cstree/cstree.hpp"

namespace cstree::cli {

using io::json;

enum ExitCode : int { kCs = 0, kNotCs = 1, kUndetermined = 2, kInputError = 3 };

/// "1.5" or "re:im".
inline Complex parse_complex(const std::string& s) {
  auto parse_double = [&](const std::string& part) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw InputError("cannot parse number '" + part + "' in '" + s + "'");
    }
    if (used != part.size()) throw InputError("cannot parse number '" + part + "' in '" + s + "'");
    return v;
  };
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {parse_double(s), 0.0};
  return {parse_double(s.substr(0, colon)), parse_double(s.substr(colon + 1))};
}

inline std::vector<Complex> parse_weights(const std::string& list) {
  std::vector<Complex> out;
  if (list.empty()) return out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
  return out;
}

inline std::vector<double> parse_reals(const std::string& list) {
  std::vector<double> out;
  for (const auto& z : parse_weights(list)) {
    if (z.imag() != 0.0) throw InputError("expected real values, got complex entry in '" + list + "'");
    out.push_back(z.real());
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": malformed JSON (" + std::string(e.what()) + ")");
  }
}

/// Writes to `path` if given, else to `out`.
inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

struct Loaded {
  DirectedTree tree;
  WeightAssignment weights;
  ShiftMatrix shift;
};

inline Loaded load_tree(const std::string& path) {
  io::TreeDocument doc = io::tree_from_json(read_json_file(path));
  DirectedTree t(doc.spec);
  if (!doc.weights) throw InputError("field 'weights': missing");
  ShiftMatrix s = build_shift(t, *doc.weights);
  return {std::move(t), std::move(*doc.weights), std::move(s)};
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline std::string fmt(Complex z) {
  if (z.imag() == 0.0) return fmt(z.real());
  return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

inline std::string describe_obstruction(const Obstruction& ob) {
  return std::visit(
      [](const auto& w) -> std::string {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, KernelWitness>) {
          return "kernel obstruction m=" + std::to_string(w.power) + ": dim ker T^m = " + std::to_string(w.dim_ker) +
                 ", dim ker T*^m = " + std::to_string(w.dim_ker_adjoint);
        } else if constexpr (std::is_same_v<W, WordWitness>) {
          return "word-trace obstruction " + word_to_string(w.word) + ": tr = " + fmt(w.trace) +
                 ", reversed tr = " + fmt(w.trace_reversed);
        } else {
          return "empty Sylvester space";
        }
      },
      ob);
}

inline std::string describe_failures(const ConditionReport& r) {
  if (r.satisfied) return "satisfied";
  std::string s = "not satisfied (";
  bool first = true;
  for (const auto& c : r.failures()) {
    if (!first) s += "; ";
    first = false;
    s += c.clause == "pair" ? "l=" + std::to_string(c.index) : c.clause + ", j=" + std::to_string(c.index);
  }
  return s + ")";
}

struct Common {
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  int restarts = 64;
  int word_len = 8;
  bool as_json = false;
  std::string out_path;

  DeciderOptions options() const {
    DeciderOptions o;
    o.tol = tol;
    o.seed = seed;
    o.restarts = restarts;
    o.max_word_len = word_len;
    return o;
  }
};

inline void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--tol", c.tol, "certificate residual bound")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--restarts", c.restarts, "unitary search restarts")->capture_default_str()->check(CLI::Range(1, 1 << 20));
  cmd->add_option("--word-len", c.word_len, "longest word for the trace test")->capture_default_str()->check(CLI::Range(2, 64));
  cmd->add_flag("--json", c.as_json, "JSON output");
  cmd->add_option("--out", c.out_path, "write output to a file");
}

struct FamilyArgs {
  std::string family;
  int kappa = 0;
  int theta = 0;
  int n = 0;
  int teeth = 0;
  std::string weights;
};

inline FamilyInstance family_instance(const FamilyArgs& a) {
  FamilyInstance inst;
  inst.family = parse_family(a.family);
  inst.kappa = a.kappa;
  inst.theta = a.theta;
  inst.weights = parse_weights(a.weights);
  return inst;
}

// ---------------------------------------------------------------------------

inline int cmd_check(const std::string& doc, const std::string& dump, const Common& c, std::ostream& out) {
  const Loaded l = load_tree(doc);
  if (!dump.empty()) emit(io::dump(io::to_json(l.shift)), dump, out);
  const Verdict v = decide_cs(l.shift.matrix, l.shift.basis, c.options());
  std::string text;
  if (c.as_json) {
    text = io::dump(io::to_json(v));
  } else {
    std::ostringstream os;
    os << "verdict: " << to_string(v.kind) << "\n";
    if (v.certificate) {
      os << "certificate: symmetric unitary A, ||AA*-I||_F = " << fmt(v.certificate->unitary_residual())
         << ", ||TA-AT^T||_F = " << fmt(v.symmetry_residual) << "\n";
    }
    if (v.obstruction) os << describe_obstruction(*v.obstruction) << "\n";
    if (v.kind == VerdictKind::undetermined) {
      os << "sylvester dim " << v.sylvester_dim << ", best unitary residual " << fmt(v.best_unitary_residual) << " after "
         << v.restarts_used << " restarts\n";
    }
    text = os.str();
  }
  emit(text, c.out_path, out);
  switch (v.kind) {
    case VerdictKind::cs: return kCs;
    case VerdictKind::not_cs: return kNotCs;
    case VerdictKind::undetermined: return kUndetermined;
  }
  return kUndetermined;
}

inline int cmd_classify(const FamilyArgs& a, double tol, const Common& c, std::ostream& out) {
  const FamilyInstance inst = family_instance(a);
  if (inst.family == Family::binary && static_cast<int>(inst.weights.size()) != inst.kappa) {
    throw InputError("binary weights: expected " + std::to_string(inst.kappa) + " values, got " +
                     std::to_string(inst.weights.size()));
  }
  const ConditionReport r = printed_condition(inst, tol);
  if (c.as_json) {
    json doc = io::to_json(r);
    if (inst.family == Family::binary) doc["alpha_chain"] = io::to_json(binary_alpha_chain(inst.kappa));
    emit(io::dump(doc), c.out_path, out);
  } else {
    std::ostringstream os;
    os << describe_failures(r) << "\n";
    for (const auto& s : r.skipped) os << "skipped " << s.clause << " at " << s.index << ": " << s.reason << "\n";
    emit(os.str(), c.out_path, out);
  }
  return r.satisfied ? 0 : 1;
}

inline int cmd_conjugate(const FamilyArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const FamilyInstance inst = family_instance(a);
  const DirectedTree t = instance_tree(inst);
  const WeightAssignment w = instance_assignment(inst);
  const ShiftMatrix s = build_shift(t, w);
  std::optional<Conjugation> conj;
  if (inst.family == Family::two_branch) {
    try {
      conj = two_branch_conjugation(TwoBranchWeights::from_flat(inst.kappa, inst.theta, inst.weights), c.tol);
    } catch (const PhaseRecursionError& e) {
      err << e.what() << "\n";
      return 1;
    }
  } else {
    const PairingResult p = pairing_oracle(t, w, s, c.tol);
    if (!p.certificate) {
      err << "no palindromic/mirror pairing of the chains\n";
      return 1;
    }
    conj = p.certificate;
  }
  json doc = io::to_json(*conj);
  doc["symmetry"] = io::to_json(verify_c_symmetry(s.matrix, *conj, c.tol));
  emit(io::dump(doc), c.out_path, out);
  return 0;
}

inline int cmd_kernels(const std::string& doc, int max_power, double rank_tol, const std::string& dump, const Common& c,
                       std::ostream& out) {
  const Loaded l = load_tree(doc);
  if (!dump.empty()) emit(io::dump(io::to_json(l.shift)), dump, out);
  const int top = max_power > 0 ? max_power : static_cast<int>(l.shift.depth) + 1;
  const KernelTable k = kernel_table(l.shift.matrix, top, rank_tol);
  if (c.as_json) {
    emit(io::dump(io::to_json(k)), c.out_path, out);
  } else {
    std::ostringstream os;
    os << "m dim_ker dim_ker_adjoint\n";
    for (const auto& r : k.rows) os << r.power << " " << r.dim_ker << " " << r.dim_ker_adjoint << "\n";
    emit(os.str(), c.out_path, out);
  }
  return 0;
}

struct CrossvalArgs {
  std::string family;
  int kappa_min = 0;
  int kappa_max = 0;
  int theta_min = 1;
  int theta_max = 1;
  std::optional<int> theta_offset;
  int samples = 20;
  std::optional<int> kappa;
  int theta = 0;
  std::string weights;
  double condition_tol = 1e-8;
};

inline int cmd_crossval(const CrossvalArgs& a, const Common& c, std::ostream& out) {
  CrossValReport rep;
  if (a.kappa) {
    FamilyInstance inst{parse_family(a.family), *a.kappa, a.theta, parse_weights(a.weights), "explicit"};
    rep = cross_validate(inst.family, {inst}, c.options(), a.condition_tol);
  } else {
    CrossValGrid g;
    g.family = parse_family(a.family);
    g.kappa_min = a.kappa_min;
    g.kappa_max = a.kappa_max;
    g.theta_min = a.theta_min;
    g.theta_max = a.theta_max;
    g.theta_offset = a.theta_offset;
    g.samples = a.samples;
    g.seed = c.seed;
    rep = cross_validate(g, c.options(), a.condition_tol);
  }
  if (c.as_json || !c.out_path.empty()) {
    emit(io::dump(io::to_json(rep)), c.out_path, out);
  }
  if (!c.as_json) {
    const auto& s = rep.summary;
    out << "instances " << s.total << ", agree " << s.agree << ", disagree " << s.disagree << " (certified "
        << s.certified_disagreements << "), undetermined " << s.undetermined << ", contradictions " << s.contradictions
        << "\n";
  }
  return rep.summary.contradictions == 0 ? 0 : 1;
}

struct BroomArgs {
  std::string weights;
  int n = 0;
  int teeth = 0;
  bool two_level = false;
  std::string level1;
  std::string level2;
};

inline int cmd_broom(const BroomArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  json doc;
  bool pass = false;
  if (a.two_level) {
    std::vector<Complex> first = parse_weights(a.level1);
    std::vector<Complex> second = parse_weights(a.level2);
    if (first.empty() && second.empty()) {
      first.assign(static_cast<std::size_t>(a.n > 0 ? a.n : 2), Complex(1.0));
      second = first;
    }
    const TwoLevelReport r = two_level_kernel_structure(first, second, c.tol);
    doc = io::to_json(r);
    pass = r.pass;
  } else {
    BroomSchedule schedule{parse_reals(a.weights)};
    if (schedule.weights.empty()) {
      const int count = a.n > 0 ? a.n : 6;
      for (int i = 1; i <= count; ++i) schedule.weights.push_back(std::pow(10.0, -i));
    } else if (a.n > 0 && static_cast<int>(schedule.size()) != a.n) {
      throw InputError("--n " + std::to_string(a.n) + " but " + std::to_string(schedule.size()) + " weights given");
    }
    try {
      const auto h = solve_h_sequence(schedule);
      const int teeth = a.teeth > 0 ? a.teeth : static_cast<int>(2 * schedule.size() + 1);
      const auto b = build_broom_conjugation(schedule, h, static_cast<std::size_t>(teeth), c.tol);
      doc = {{"h_sequence", io::to_json(h)}, {"conjugation", io::to_json(b)}};
      pass = b.check.pass;
    } catch (const InfeasibleStep& e) {
      err << e.what() << "\n";
      doc = {{"infeasible", {{"step", e.step}, {"deficit", e.deficit}}}};
    }
  }
  if (c.as_json || !c.out_path.empty()) emit(io::dump(doc), c.out_path, out);
  if (!c.as_json) out << (pass ? "pass" : "fail") << "\n";
  return pass ? 0 : 1;
}

inline int cmd_generate(const FamilyArgs& a, const std::string& per_depth, const Common& c, std::ostream& out) {
  DirectedTree t = [&] {
    if (a.family == "path") return generate_path(a.n);
    if (a.family == "two-branch") return generate_two_branch(a.kappa, a.theta);
    if (a.family == "binary") return generate_binary(a.kappa);
    if (a.family == "broom") return generate_broom(a.teeth);
    if (a.family == "two-level-broom") return generate_two_level_broom(a.teeth);
    throw InputError("unknown family '" + a.family + "'");
  }();
  WeightAssignment w = constant_weights(t, 1.0);
  if (!per_depth.empty()) {
    const auto g = parse_weights(per_depth);
    w = generation_weights(t, g);
  } else if (!a.weights.empty()) {
    const auto flat = parse_weights(a.weights);
    if (a.family == "two-branch") {
      w = TwoBranchWeights::from_flat(a.kappa, a.theta, flat).assignment();
    } else if (a.family == "broom") {
      if (static_cast<int>(flat.size()) != a.teeth) throw InputError("broom needs one weight per tooth");
      for (int j = 1; j <= a.teeth; ++j) w[std::to_string(j)] = flat[static_cast<std::size_t>(j - 1)];
    } else {
      w = generation_weights(t, flat);
    }
  }
  emit(io::dump(io::to_json(t, w)), c.out_path, out);
  return 0;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted shifts on rooted trees: complex symmetry with certificates"};
  app.require_subcommand(1);

  Common common;
  std::string doc_path;
  std::string dump_path;
  FamilyArgs fam;
  double condition_tol = 1e-9;
  int max_power = 0;
  double rank_tol = kDefaultRankTol;
  CrossvalArgs cv;
  BroomArgs br;
  std::string gen_weights;

  auto* check = app.add_subcommand("check", "decide complex symmetry of a tree document");
  check->add_option("document", doc_path, "tree document (JSON, '-' for stdin)")->required();
  check->add_option("--dump-matrix", dump_path, "write the shift matrix as JSON");
  add_common(check, common);

  auto* classify = app.add_subcommand("classify", "evaluate the family criterion as stated");
  classify->add_option("--family", fam.family, "two-branch | binary")->required();
  classify->add_option("--kappa", fam.kappa)->required();
  classify->add_option("--theta", fam.theta);
  classify->add_option("--weights", fam.weights, "comma-separated, re or re:im; two-branch: trunk then branch")->required();
  classify->add_option("--condition-tol", condition_tol, "relative modulus tolerance")->capture_default_str();
  add_common(classify, common);

  auto* conjugate = app.add_subcommand("conjugate", "build the explicit conjugation for a family instance");
  conjugate->add_option("--family", fam.family, "two-branch | binary")->required();
  conjugate->add_option("--kappa", fam.kappa)->required();
  conjugate->add_option("--theta", fam.theta);
  conjugate->add_option("--weights", fam.weights)->required();
  add_common(conjugate, common);

  auto* kernels = app.add_subcommand("kernels", "kernel dimensions of powers of T and T*");
  kernels->add_option("document", doc_path)->required();
  kernels->add_option("--max-power", max_power, "largest power (default depth+1)")->check(CLI::PositiveNumber);
  kernels->add_option("--rank-tol", rank_tol)->capture_default_str();
  kernels->add_option("--dump-matrix", dump_path);
  add_common(kernels, common);

  auto* crossval = app.add_subcommand("crossval", "compare stated criteria with the certified oracles");
  crossval->add_option("--family", cv.family, "two-branch | binary")->required();
  crossval->add_option("--kappa-min", cv.kappa_min)->capture_default_str();
  crossval->add_option("--kappa-max", cv.kappa_max)->capture_default_str();
  crossval->add_option("--theta-min", cv.theta_min)->capture_default_str();
  crossval->add_option("--theta-max", cv.theta_max)->capture_default_str();
  crossval->add_option("--theta-offset", cv.theta_offset, "theta = kappa + offset");
  crossval->add_option("--samples", cv.samples)->capture_default_str()->check(CLI::NonNegativeNumber);
  crossval->add_option("--kappa", cv.kappa, "single explicit instance");
  crossval->add_option("--theta", cv.theta);
  crossval->add_option("--weights", cv.weights);
  crossval->add_option("--condition-tol", cv.condition_tol)->capture_default_str();
  add_common(crossval, common);

  auto* broom = app.add_subcommand("broom", "inductive conjugation on a broom, or two-level kernel check");
  broom->add_option("--weights", br.weights, "lambda_1..lambda_N in (0,1) (default 10^-i)");
  broom->add_option("--n", br.n, "number of weights N (default 6)")->check(CLI::PositiveNumber);
  broom->add_option("--teeth", br.teeth, "M >= 2N+1 (default 2N+1)");
  broom->add_flag("--two-level", br.two_level);
  broom->add_option("--level1", br.level1, "first-level weights (default N unit weights, N = --n or 2)");
  broom->add_option("--level2", br.level2, "second-level weights");
  add_common(broom, common);

  auto* generate = app.add_subcommand("generate", "emit a tree document");
  generate->add_option("--family", fam.family, "path | two-branch | binary | broom | two-level-broom")->required();
  generate->add_option("--n", fam.n, "path vertices");
  generate->add_option("--kappa", fam.kappa);
  generate->add_option("--theta", fam.theta);
  generate->add_option("--teeth", fam.teeth);
  generate->add_option("--weights", fam.weights, "family weights (two-branch: trunk then branch)");
  generate->add_option("--generation-weights", gen_weights, "one weight per depth");
  add_common(generate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*check) return cmd_check(doc_path, dump_path, common, out);
    if (*classify) return cmd_classify(fam, condition_tol, common, out);
    if (*conjugate) return cmd_conjugate(fam, common, out, err);
    if (*kernels) return cmd_kernels(doc_path, max_power, rank_tol, dump_path, common, out);
    if (*crossval) return cmd_crossval(cv, common, out);
    if (*broom) return cmd_broom(br, common, out, err);
    if (*generate) return cmd_generate(fam, gen_weights, common, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace cstree::cli
