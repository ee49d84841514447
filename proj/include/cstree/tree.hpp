#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cstree/core.hpp"

namespace cstree {

/// Vertex label. Generators use the grammar `int` or `int,int`
/// (e.g. "0", "-3", "1,2") so labels map back to family coordinates.
using VertexId = std::string;

struct Edge {
  VertexId parent;
  VertexId child;
  friend bool operator==(const Edge&, const Edge&) = default;
};

namespace detail {

inline std::optional<std::vector<long>> parse_coordinates(std::string_view label) {
  std::vector<long> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = label.find(',', pos);
    const std::string_view part =
        label.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    long value = 0;
    const char* first = part.data();
    const char* last = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (part.empty() || ec != std::errc() || ptr != last) return std::nullopt;
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Natural label order: numeric coordinates compare numerically
/// ("1,2" < "1,10"), numeric labels precede free-form ones.
struct LabelLess {
  bool operator()(const VertexId& a, const VertexId& b) const {
    const auto ca = detail::parse_coordinates(a);
    const auto cb = detail::parse_coordinates(b);
    if (ca && cb) {
      if (*ca != *cb) return *ca < *cb;
      return a < b;
    }
    if (ca.has_value() != cb.has_value()) return ca.has_value();
    return a < b;
  }
};

/// Unvalidated tree description, as read from a document.
struct TreeSpec {
  std::vector<VertexId> vertices;
  VertexId root;
  std::vector<Edge> edges;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_tree(const TreeSpec& spec) {
  ValidationReport report;
  auto& v = report.violations;
  if (spec.vertices.empty()) {
    v.push_back("tree has no vertices");
    return report;
  }
  std::map<VertexId, std::size_t> index;
  for (const auto& label : spec.vertices) {
    if (label.empty()) v.push_back("empty vertex label");
    if (!index.emplace(label, index.size()).second) v.push_back("duplicate vertex " + label);
  }
  const bool root_known = index.count(spec.root) > 0;
  if (!root_known) v.push_back("root " + spec.root + " is not a vertex");

  std::map<VertexId, std::vector<VertexId>> parents;
  std::map<VertexId, std::vector<VertexId>> children;
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& e : spec.edges) {
    const std::string name = "(" + e.parent + "," + e.child + ")";
    bool known = true;
    for (const auto* end : {&e.parent, &e.child}) {
      if (!index.count(*end)) {
        v.push_back("edge " + name + " references unknown vertex " + *end);
        known = false;
      }
    }
    if (!known) continue;
    if (e.parent == e.child) {
      v.push_back("edge " + name + " is a self-loop");
      continue;
    }
    if (!seen.emplace(e.parent, e.child).second) {
      v.push_back("duplicate edge " + name);
      continue;
    }
    parents[e.child].push_back(e.parent);
    children[e.parent].push_back(e.child);
  }
  for (const auto& label : spec.vertices) {
    const auto it = parents.find(label);
    const std::size_t count = it == parents.end() ? 0 : it->second.size();
    if (label == spec.root) {
      if (count > 0) v.push_back("root " + label + " has a parent");
    } else if (count > 1) {
      v.push_back("vertex " + label + " has " + (count == 2 ? std::string("two") : std::to_string(count)) +
                  " parents");
    }
  }
  if (!root_known) return report;

  std::set<VertexId> reached{spec.root};
  std::queue<VertexId> frontier;
  frontier.push(spec.root);
  while (!frontier.empty()) {
    const VertexId u = frontier.front();
    frontier.pop();
    for (const auto& c : children[u]) {
      if (reached.insert(c).second) frontier.push(c);
    }
  }
  for (const auto& label : spec.vertices) {
    if (reached.count(label)) continue;
    // Walk up unique parents; returning to the start means a cycle.
    bool cyclic = false;
    VertexId cur = label;
    std::set<VertexId> path;
    while (path.insert(cur).second) {
      const auto it = parents.find(cur);
      if (it == parents.end() || it->second.size() != 1) break;
      cur = it->second.front();
      if (cur == label) {
        cyclic = true;
        break;
      }
    }
    v.push_back("vertex " + label + (cyclic ? " lies on a cycle" : " is not reachable from root"));
  }
  return report;
}

/// Finite rooted directed tree. Immutable once built; vertex order is the
/// order supplied and serves as the basis order of l^2(V). Children are
/// kept sorted by LabelLess.
class DirectedTree {
 public:
  explicit DirectedTree(TreeSpec spec) : spec_(std::move(spec)) {
    const ValidationReport report = validate_tree(spec_);
    if (!report.ok()) {
      std::string msg = "invalid tree:";
      for (const auto& s : report.violations) msg += " " + s + ";";
      throw InputError(msg);
    }
    const std::size_t n = spec_.vertices.size();
    for (std::size_t i = 0; i < n; ++i) index_.emplace(spec_.vertices[i], i);
    parent_.assign(n, std::nullopt);
    children_.assign(n, {});
    for (const auto& e : spec_.edges) {
      const std::size_t p = index_.at(e.parent);
      const std::size_t c = index_.at(e.child);
      parent_[c] = p;
      children_[p].push_back(c);
    }
    LabelLess less;
    for (auto& ch : children_) {
      std::sort(ch.begin(), ch.end(), [&](std::size_t a, std::size_t b) {
        return less(spec_.vertices[a], spec_.vertices[b]);
      });
    }
    root_ = index_.at(spec_.root);
    depth_of_.assign(n, 0);
    std::queue<std::size_t> frontier;
    frontier.push(root_);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t c : children_[u]) {
        depth_of_[c] = depth_of_[u] + 1;
        depth_ = std::max(depth_, depth_of_[c]);
        frontier.push(c);
      }
    }
  }

  std::size_t size() const { return spec_.vertices.size(); }
  const std::vector<VertexId>& vertices() const { return spec_.vertices; }
  const VertexId& label(std::size_t i) const { return spec_.vertices.at(i); }
  const VertexId& root() const { return spec_.root; }
  std::size_t root_index() const { return root_; }
  const std::vector<Edge>& edges() const { return spec_.edges; }
  const TreeSpec& spec() const { return spec_; }

  std::optional<std::size_t> find(const VertexId& v) const {
    const auto it = index_.find(v);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t index_of(const VertexId& v) const {
    const auto i = find(v);
    if (!i) throw InputError("unknown vertex " + v);
    return *i;
  }

  std::optional<std::size_t> parent(std::size_t i) const { return parent_.at(i); }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }

  /// Longest root-to-vertex path length.
  std::size_t depth() const { return depth_; }
  std::size_t depth_of(std::size_t i) const { return depth_of_.at(i); }

  std::vector<std::size_t> branching_vertices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (children_[i].size() >= 2) out.push_back(i);
    }
    return out;
  }

  /// Vertices in breadth-first order from the root, children in label order.
  std::vector<std::size_t> bfs_order() const {
    std::vector<std::size_t> order{root_};
    for (std::size_t k = 0; k < order.size(); ++k) {
      for (std::size_t c : children_[order[k]]) order.push_back(c);
    }
    return order;
  }

 private:
  TreeSpec spec_;
  std::map<VertexId, std::size_t> index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t root_ = 0;
  std::vector<std::size_t> depth_of_;
  std::size_t depth_ = 0;
};

namespace detail {

inline std::string coord(long k, long l) { return std::to_string(k) + "," + std::to_string(l); }

/// Builds a tree whose vertex list is the breadth-first order of `edges`.
inline DirectedTree bfs_tree(const VertexId& root, std::vector<Edge> edges) {
  std::map<VertexId, std::vector<VertexId>, LabelLess> kids;
  for (const auto& e : edges) kids[e.parent].push_back(e.child);
  for (auto& [_, ch] : kids) std::sort(ch.begin(), ch.end(), LabelLess{});
  std::vector<VertexId> order{root};
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto it = kids.find(order[k]);
    if (it == kids.end()) continue;
    for (const auto& c : it->second) order.push_back(c);
  }
  return DirectedTree(TreeSpec{std::move(order), root, std::move(edges)});
}

}  // namespace detail

/// Path with vertices "0" -> "1" -> ... -> "n-1".
inline DirectedTree generate_path(int n) {
  if (n < 1) throw InputError("path length n must be >= 1");
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({std::to_string(i - 1), std::to_string(i)});
  return detail::bfs_tree("0", std::move(edges));
}

/// Trunk "-kappa" -> ... -> "0", then two branches "i,1" -> ... -> "i,theta"
/// for i in {1, 2}. The root is "-kappa" ("0" when kappa = 0).
inline DirectedTree generate_two_branch(int kappa, int theta) {
  if (kappa < 0) throw InputError("kappa must be >= 0");
  if (theta < 1) throw InputError("theta must be >= 1");
  std::vector<Edge> edges;
  for (int k = kappa; k >= 1; --k) edges.push_back({std::to_string(-k), std::to_string(-k + 1)});
  for (int i = 1; i <= 2; ++i) {
    edges.push_back({"0", detail::coord(i, 1)});
    for (int j = 1; j < theta; ++j) edges.push_back({detail::coord(i, j), detail::coord(i, j + 1)});
  }
  return detail::bfs_tree(std::to_string(-kappa), std::move(edges));
}

/// Complete binary tree of depth kappa; vertex "k,l" has children
/// "k+1,2l-1" and "k+1,2l". Root "0,1".
inline DirectedTree generate_binary(int kappa) {
  if (kappa < 2) throw InputError("binary tree depth kappa must be >= 2");
  if (kappa > 20) throw InputError("binary tree depth kappa must be <= 20");
  std::vector<Edge> edges;
  for (long k = 0; k < kappa; ++k) {
    for (long l = 1; l <= (1L << k); ++l) {
      edges.push_back({detail::coord(k, l), detail::coord(k + 1, 2 * l - 1)});
      edges.push_back({detail::coord(k, l), detail::coord(k + 1, 2 * l)});
    }
  }
  return detail::bfs_tree("0,1", std::move(edges));
}

/// Root "0" with leaf children "1".."N".
inline DirectedTree generate_broom(int teeth) {
  if (teeth < 1) throw InputError("broom tooth count N must be >= 1");
  std::vector<Edge> edges;
  for (int j = 1; j <= teeth; ++j) edges.push_back({"0", std::to_string(j)});
  return detail::bfs_tree("0", std::move(edges));
}

/// Root "0", children "1,j", grandchildren "2,j" for j = 1..N.
inline DirectedTree generate_two_level_broom(int teeth) {
  if (teeth < 1) throw InputError("broom tooth count N must be >= 1");
  std::vector<Edge> edges;
  for (int j = 1; j <= teeth; ++j) {
    edges.push_back({"0", detail::coord(1, j)});
    edges.push_back({detail::coord(1, j), detail::coord(2, j)});
  }
  return detail::bfs_tree("0", std::move(edges));
}

}  // namespace cstree
