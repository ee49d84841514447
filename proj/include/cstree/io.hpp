#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cstree/broom.hpp"
#include "cstree/conjugation.hpp"
#include "cstree/crossval.hpp"
#include "cstree/decider.hpp"
#include "cstree/families.hpp"
#include "cstree/shift.hpp"
#include "cstree/tree.hpp"

namespace cstree::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scalars

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

/// NaN and infinities become null.
inline json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

namespace detail {

inline std::string describe(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::string: return "a string";
    case json::value_t::array: return "an array";
    case json::value_t::object: return "an object";
    default: return "a number";
  }
}

[[noreturn]] inline void fail(const std::string& field, const std::string& what) {
  throw InputError("field '" + field + "': " + what);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object, got " + describe(obj));
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string, got " + describe(j));
  return j.get<std::string>();
}

inline double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number, got " + describe(j));
  return j.get<double>();
}

}  // namespace detail

/// A number, or [re, im].
inline Complex complex_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  detail::fail(field, "expected a number or [re, im], got " + detail::describe(j));
}

// ---------------------------------------------------------------------------
// Tree documents

struct TreeDocument {
  TreeSpec spec;
  std::optional<WeightAssignment> weights;
};

inline json to_json(const DirectedTree& t, const std::optional<WeightAssignment>& w = std::nullopt) {
  json doc;
  doc["vertices"] = t.vertices();
  doc["root"] = t.root();
  json edges = json::array();
  for (const auto& e : t.edges()) edges.push_back({{"parent", e.parent}, {"child", e.child}});
  doc["edges"] = std::move(edges);
  if (w) {
    json ws = json::object();
    for (const auto& [label, value] : *w) ws[label] = value.imag() == 0.0 ? json(value.real()) : to_json(value);
    doc["weights"] = std::move(ws);
  }
  return doc;
}

/// Edges may be {"parent": p, "child": c} or [p, c]. Weights map labels to
/// a number or [re, im].
inline TreeDocument tree_from_json(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) fail("<document>", "expected an object, got " + describe(doc));
  TreeDocument out;
  const json& vs = require(doc, "vertices", "");
  if (!vs.is_array()) fail("vertices", "expected an array, got " + describe(vs));
  for (std::size_t i = 0; i < vs.size(); ++i) {
    out.spec.vertices.push_back(get_string(vs[i], "vertices[" + std::to_string(i) + "]"));
  }
  out.spec.root = get_string(require(doc, "root", ""), "root");
  const json& es = require(doc, "edges", "");
  if (!es.is_array()) fail("edges", "expected an array, got " + describe(es));
  for (std::size_t i = 0; i < es.size(); ++i) {
    const std::string path = "edges[" + std::to_string(i) + "]";
    const json& e = es[i];
    if (e.is_array()) {
      if (e.size() != 2) fail(path, "expected [parent, child]");
      out.spec.edges.push_back({get_string(e[0], path + "[0]"), get_string(e[1], path + "[1]")});
    } else if (e.is_object()) {
      out.spec.edges.push_back({get_string(require(e, "parent", path), path + ".parent"),
                                get_string(require(e, "child", path), path + ".child")});
    } else {
      fail(path, "expected an object or [parent, child], got " + describe(e));
    }
  }
  if (const auto it = doc.find("weights"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) fail("weights", "expected an object, got " + describe(*it));
    WeightAssignment w;
    for (const auto& [label, value] : it->items()) w[label] = complex_from_json(value, "weights." + label);
    out.weights = std::move(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrices and conjugations

/// Row-major entries as [re, im] pairs.
inline json matrix_to_json(const Matrix& m, const std::vector<VertexId>& basis = {}) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(to_json(m(i, j)));
  json doc;
  if (!basis.empty()) doc["basis"] = basis;
  doc["rows"] = m.rows();
  doc["cols"] = m.cols();
  doc["data"] = std::move(data);
  return doc;
}

inline Matrix matrix_from_json(const json& doc, const std::string& path = "") {
  using namespace detail;
  const json& rj = require(doc, "rows", path);
  const json& cj = require(doc, "cols", path);
  if (!rj.is_number_integer() || rj.get<long>() < 0) fail(join(path, "rows"), "expected a non-negative integer");
  if (!cj.is_number_integer() || cj.get<long>() < 0) fail(join(path, "cols"), "expected a non-negative integer");
  const auto rows = rj.get<Index>();
  const auto cols = cj.get<Index>();
  const json& data = require(doc, "data", path);
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
    fail(join(path, "data"), "expected an array of " + std::to_string(rows * cols) + " entries");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      m(i, j) = complex_from_json(data[k], join(path, "data[" + std::to_string(k) + "]"));
    }
  return m;
}

inline json to_json(const ShiftMatrix& s) { return matrix_to_json(s.matrix, s.basis); }

inline json to_json(const Conjugation& c) {
  return {{"A", matrix_to_json(c.matrix())},
          {"basis", c.basis()},
          {"residual_unitary", number(c.unitary_residual())},
          {"residual_symmetric", number(c.symmetric_residual())}};
}

/// Re-validates the matrix as a conjugation at `tol`.
inline Conjugation conjugation_from_json(const json& doc, double tol = kDefaultTol) {
  Matrix a = matrix_from_json(detail::require(doc, "A", ""), "A");
  std::vector<VertexId> basis;
  if (const auto it = doc.find("basis"); it != doc.end()) {
    if (!it->is_array()) detail::fail("basis", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      basis.push_back(detail::get_string((*it)[i], "basis[" + std::to_string(i) + "]"));
  }
  return Conjugation::from_matrix(std::move(a), std::move(basis), tol);
}

inline json to_json(const SymmetryReport& r) {
  return {{"residual", number(r.residual)},
          {"pass", r.pass},
          {"worst_column", r.worst_column},
          {"worst_column_residual", number(r.worst_column_residual)}};
}

// ---------------------------------------------------------------------------
// Decider

inline json to_json(const DeciderOptions& o) {
  return {{"tol", o.tol},
          {"rank_tol", o.rank_tol},
          {"max_word_len", o.max_word_len},
          {"restarts", o.restarts},
          {"seed", o.seed},
          {"gradient_iterations", o.gradient_iterations},
          {"polish_iterations", o.polish_iterations}};
}

inline json to_json(const Obstruction& ob) {
  return std::visit(
      [](const auto& w) -> json {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, KernelWitness>) {
          return {{"kind", "kernel"},
                  {"witness", {{"power", w.power}, {"dim_ker", w.dim_ker}, {"dim_ker_adjoint", w.dim_ker_adjoint}}}};
        } else if constexpr (std::is_same_v<W, WordWitness>) {
          json letters = json::array();
          for (Letter l : w.word) letters.push_back(l == Letter::T ? "T" : "T*");
          return {{"kind", "word_trace"},
                  {"witness",
                   {{"word", word_to_string(w.word)},
                    {"letters", letters},
                    {"trace", to_json(w.trace)},
                    {"trace_reversed", to_json(w.trace_reversed)},
                    {"scale", number(w.scale)},
                    {"threshold", number(w.threshold)}}}};
        } else {
          return {{"kind", "empty_sylvester_space"}, {"witness", {{"dim", w.dim}}}};
        }
      },
      ob);
}

inline json to_json(const Verdict& v) {
  json doc;
  doc["verdict"] = to_string(v.kind);
  doc["certificate"] = v.certificate ? to_json(*v.certificate) : json(nullptr);
  doc["obstruction"] = v.obstruction ? to_json(*v.obstruction) : json(nullptr);
  doc["residuals"] = {{"symmetry", number(v.symmetry_residual)},
                      {"unitary", v.certificate ? number(v.certificate->unitary_residual()) : json(nullptr)},
                      {"symmetric", v.certificate ? number(v.certificate->symmetric_residual()) : json(nullptr)}};
  doc["diagnostics"] = {{"sylvester_dim", v.sylvester_dim},
                        {"best_unitary_residual", number(v.best_unitary_residual)},
                        {"restarts_used", v.restarts_used}};
  doc["seed"] = v.options.seed;
  doc["options"] = to_json(v.options);
  return doc;
}

inline json to_json(const KernelTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back({{"m", r.power}, {"dim_ker", r.dim_ker}, {"dim_ker_adjoint", r.dim_ker_adjoint}});
  return {{"dim", t.dim}, {"rank_tol", t.rank_tol}, {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Families

inline json to_json(const ConditionReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"clause", c.clause}, {"index", c.index}, {"lhs", number(c.lhs)}, {"rhs", number(c.rhs)}, {"holds", c.holds}});
  }
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"clause", s.clause}, {"index", s.index}, {"reason", s.reason}});
  return {{"satisfied", r.satisfied}, {"tol", r.tol}, {"checks", checks}, {"skipped", skipped}};
}

inline json to_json(const std::vector<AlphaEntry>& chain) {
  json out = json::array();
  for (const auto& a : chain) out.push_back({{"l", a.l}, {"modulus", number(a.modulus)}});
  return out;
}

inline json weights_to_json(const std::vector<Complex>& w) {
  json out = json::array();
  for (const auto& x : w) out.push_back(to_json(x));
  return out;
}

inline json to_json(const BlockDecomposition& d) {
  json chains = json::array();
  for (const auto& c : d.chains) chains.push_back({{"offset", c.offset}, {"weights", weights_to_json(c.weights)}});
  return {{"shape", d.shape}, {"residual", number(d.residual)}, {"chains", chains}};
}

// ---------------------------------------------------------------------------
// Broom

template <class Real>
json real_vector(const std::vector<Real>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(number(static_cast<double>(x)));
  return out;
}

template <class Real>
json to_json(const HSequence<Real>& h) {
  json t = json::array();
  for (const auto& row : h.t) t.push_back(real_vector(row));
  json coords = json::array();
  for (const auto& row : h.coords) coords.push_back(real_vector(row));
  return {{"weights", h.weights},
          {"t", t},
          {"s", real_vector(h.s)},
          {"coords", coords},
          {"max_gram_residual", number(h.max_gram_residual())},
          {"max_norm_residual", number(h.max_norm_residual())}};
}

inline json to_json(const BroomCheck& c) {
  json inter = json::array();
  for (double r : c.intertwining) inter.push_back(number(r));
  return {{"tol", c.tol},
          {"norm_residual", number(c.norm_residual)},
          {"orthogonality_residual", number(c.orthogonality_residual)},
          {"worst_pair", {c.worst_pair.first, c.worst_pair.second}},
          {"h_orthogonality_to_f0", number(c.h_orthogonality_to_f0)},
          {"intertwining", inter},
          {"pass", c.pass}};
}

template <class Real>
json to_json(const BroomConjugation<Real>& b) {
  json images = json::array();
  for (const auto& v : b.images) images.push_back(real_vector(v));
  return {{"teeth", b.teeth}, {"tail_weight", number(b.tail_weight)}, {"images", images}, {"check", to_json(b.check)}};
}

inline json to_json(const TwoLevelReport& r) {
  return {{"teeth", r.teeth},
          {"dim_ker", r.dim_ker},
          {"dim_ker_adjoint", r.dim_ker_adjoint},
          {"ker_distance", number(r.ker_distance)},
          {"ker_adjoint_distance", number(r.ker_adjoint_distance)},
          {"ker_perp_distance", number(r.ker_perp_distance)},
          {"ker_adjoint_perp_distance", number(r.ker_adjoint_perp_distance)},
          {"tol", r.tol},
          {"pass", r.pass}};
}

// ---------------------------------------------------------------------------
// Cross-validation

inline json to_json(const PairingResult& p) {
  return {{"verdict", to_string(p.outcome)},
          {"certificate", p.certificate ? to_json(*p.certificate) : json(nullptr)},
          {"symmetry_residual", number(p.symmetry_residual)},
          {"decomposition_residual", number(p.decomposition_residual)}};
}

inline json to_json(const CrossValRecord& r) {
  json params = {{"family", to_string(r.instance.family)}, {"kappa", r.instance.kappa}};
  if (r.instance.family == Family::two_branch) params["theta"] = r.instance.theta;
  return {{"index", r.index},
          {"params", params},
          {"weights", weights_to_json(r.instance.weights)},
          {"sample_kind", r.instance.sample_kind},
          {"printed_condition", to_json(r.printed)},
          {"decider", to_json(r.decider)},
          {"pairing", to_json(r.pairing)},
          {"agree", r.agree},
          {"certified", r.certified},
          {"contradiction", r.contradiction}};
}

inline json to_json(const CrossValSummary& s) {
  return {{"total", s.total},
          {"agree", s.agree},
          {"disagree", s.disagree},
          {"certified_disagreements", s.certified_disagreements},
          {"undetermined", s.undetermined},
          {"decider_cs", s.decider_cs},
          {"decider_not_cs", s.decider_not_cs},
          {"printed_satisfied", s.printed_satisfied},
          {"pairing_cs", s.pairing_cs},
          {"contradictions", s.contradictions}};
}

inline json to_json(const CrossValReport& rep) {
  json doc;
  doc["family"] = to_string(rep.family);
  if (rep.grid) {
    const auto& g = *rep.grid;
    doc["grid"] = {{"kappa_min", g.kappa_min},
                   {"kappa_max", g.kappa_max},
                   {"theta_min", g.theta_min},
                   {"theta_max", g.theta_max},
                   {"theta_offset", g.theta_offset ? json(*g.theta_offset) : json(nullptr)},
                   {"samples", g.samples},
                   {"seed", g.seed}};
  } else {
    doc["grid"] = nullptr;
  }
  doc["options"] = to_json(rep.options);
  doc["condition_tol"] = rep.condition_tol;
  json records = json::array();
  json disagreements = json::array();
  for (const auto& r : rep.records) {
    records.push_back(to_json(r));
    if (r.decider.kind != VerdictKind::undetermined && !r.agree) disagreements.push_back(r.index);
  }
  doc["records"] = std::move(records);
  doc["disagreements"] = std::move(disagreements);
  doc["summary"] = to_json(rep.summary);
  return doc;
}

/// Canonical text form: two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace cstree::io
