#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace cstree;

namespace {

bool mentions(const ValidationReport& r, const std::string& text) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const std::string& v) { return v.find(text) != std::string::npos; });
}

std::set<VertexId> label_set(const DirectedTree& t) { return {t.vertices().begin(), t.vertices().end()}; }

}  // namespace

TEST(ValidateTree, SingleVertexIsATree) {
  EXPECT_TRUE(validate_tree(TreeSpec{{"0"}, "0", {}}).ok());
}

TEST(ValidateTree, TwoParentsNamed) {
  const auto r = validate_tree(TreeSpec{{"0", "1", "2"}, "0", {{"0", "1"}, {"2", "1"}}});
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "vertex 1 has two parents"));
}

TEST(ValidateTree, ForkTreeIsValid) {
  EXPECT_TRUE(validate_tree(fixtures::fork_tree().spec()).ok());
}

TEST(ValidateTree, ReportsEachDefect) {
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "x", {}}), "root x is not a vertex"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "0"}, "0", {}}), "duplicate vertex 0"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "0", {{"0", "7"}}}), "unknown vertex 7"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "0", {{"0", "1"}, {"1", "1"}}}), "self-loop"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "0", {{"0", "1"}, {"0", "1"}}}), "duplicate edge"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "0", {}}), "vertex 1 is not reachable"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1"}, "0", {{"1", "0"}, {"0", "1"}}}), "root 0 has a parent"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{"0", "1", "2"}, "0", {{"1", "2"}, {"2", "1"}}}), "lies on a cycle"));
  EXPECT_TRUE(mentions(validate_tree(TreeSpec{{}, "0", {}}), "no vertices"));
}

TEST(DirectedTree, RejectsInvalidSpec) {
  EXPECT_THROW(DirectedTree(TreeSpec{{"0", "1", "2"}, "0", {{"0", "1"}, {"2", "1"}}}), InputError);
}

TEST(DirectedTree, ParentChildrenDepth) {
  const DirectedTree t = fixtures::fork_tree();
  const auto v21 = t.index_of("2,1");
  EXPECT_EQ(t.label(*t.parent(v21)), "0");
  EXPECT_FALSE(t.parent(t.root_index()).has_value());
  ASSERT_EQ(t.children(t.root_index()).size(), 2u);
  EXPECT_EQ(t.label(t.children(t.root_index())[0]), "1,1");
  EXPECT_EQ(t.depth(), 2u);
  EXPECT_EQ(t.depth_of(t.index_of("2,2")), 2u);
}

TEST(LabelLess, NumericCoordinates) {
  LabelLess less;
  EXPECT_TRUE(less("1,2", "1,10"));
  EXPECT_TRUE(less("-1", "0"));
  EXPECT_TRUE(less("9", "10"));
  EXPECT_TRUE(less("5", "abc"));
  EXPECT_FALSE(less("abc", "5"));
  EXPECT_FALSE(less("1,1", "1,1"));
}

TEST(GenerateTwoBranch, KappaOneThetaTwo) {
  const DirectedTree t = generate_two_branch(1, 2);
  EXPECT_EQ(label_set(t), (std::set<VertexId>{"-1", "0", "1,1", "1,2", "2,1", "2,2"}));
  EXPECT_EQ(t.root(), "-1");
}

TEST(GenerateTwoBranch, SmallestInstance) {
  const DirectedTree t = generate_two_branch(0, 1);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.root(), "0");
  EXPECT_EQ(t.children(t.root_index()).size(), 2u);
  for (std::size_t c : t.children(t.root_index())) EXPECT_TRUE(t.children(c).empty());
}

TEST(GenerateTwoBranch, DepthAndBranching) {
  const DirectedTree t = generate_two_branch(2, 3);
  EXPECT_EQ(t.depth(), 5u);
  ASSERT_EQ(t.branching_vertices().size(), 1u);
  EXPECT_EQ(t.label(t.branching_vertices()[0]), "0");
}

TEST(GenerateTwoBranch, RejectsBadParameters) {
  EXPECT_THROW(generate_two_branch(-1, 2), InputError);
  EXPECT_THROW(generate_two_branch(1, 0), InputError);
}

TEST(GenerateBinary, VertexCounts) {
  EXPECT_EQ(generate_binary(2).size(), 7u);
  EXPECT_EQ(generate_binary(3).size(), 15u);
}

TEST(GenerateBinary, ChildRule) {
  const DirectedTree t = generate_binary(2);
  const auto& ch = t.children(t.index_of("1,2"));
  ASSERT_EQ(ch.size(), 2u);
  EXPECT_EQ(t.label(ch[0]), "2,3");
  EXPECT_EQ(t.label(ch[1]), "2,4");
}

TEST(GenerateBinary, RejectsShallowDepth) { EXPECT_THROW(generate_binary(1), InputError); }

TEST(GenerateSmallFamilies, PathBroomTwoLevel) {
  const DirectedTree p = generate_path(4);
  EXPECT_EQ(p.size(), 4u);
  EXPECT_EQ(p.depth(), 3u);
  EXPECT_TRUE(p.branching_vertices().empty());

  const DirectedTree b = generate_broom(3);
  EXPECT_EQ(b.size(), 4u);
  EXPECT_EQ(b.children(b.root_index()).size(), 3u);

  const DirectedTree w = generate_two_level_broom(2);
  EXPECT_EQ(w.size(), 5u);
  EXPECT_EQ(w.depth(), 2u);
  EXPECT_EQ(label_set(w), (std::set<VertexId>{"0", "1,1", "1,2", "2,1", "2,2"}));
}

// Properties over the generator families.

TEST(GeneratorProperties, ValidStructureAndDeterminism) {
  for (int kappa = 0; kappa <= 4; ++kappa)
    for (int theta = 1; theta <= 5; ++theta) {
      const DirectedTree t = generate_two_branch(kappa, theta);
      EXPECT_TRUE(validate_tree(t.spec()).ok());
      EXPECT_EQ(t.size(), static_cast<std::size_t>(kappa + 1 + 2 * theta));
      EXPECT_EQ(t.depth(), static_cast<std::size_t>(kappa + theta));
      EXPECT_EQ(t.branching_vertices().size(), 1u);
      EXPECT_EQ(t.vertices(), generate_two_branch(kappa, theta).vertices());
    }
  for (int kappa = 2; kappa <= 6; ++kappa) {
    const DirectedTree t = generate_binary(kappa);
    EXPECT_TRUE(validate_tree(t.spec()).ok());
    EXPECT_EQ(t.depth(), static_cast<std::size_t>(kappa));
    EXPECT_EQ(t.branching_vertices().size(), (std::size_t{1} << kappa) - 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto k = t.children(i).size();
      EXPECT_TRUE(k == 0 || k == 2);
      if (k == 0) {
        EXPECT_EQ(t.depth_of(i), static_cast<std::size_t>(kappa));
      }
    }
    EXPECT_EQ(t.vertices(), generate_binary(kappa).vertices());
  }
  for (int n = 1; n <= 6; ++n) {
    EXPECT_TRUE(validate_tree(generate_path(n).spec()).ok());
    EXPECT_TRUE(validate_tree(generate_broom(n).spec()).ok());
    EXPECT_TRUE(validate_tree(generate_two_level_broom(n).spec()).ok());
  }
}

TEST(GeneratorProperties, RandomTreesConsistent) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const DirectedTree t = fixtures::random_tree(rng, n);
    EXPECT_TRUE(validate_tree(t.spec()).ok());
    const auto order = t.bfs_order();
    EXPECT_EQ(order.size(), t.size());
    EXPECT_EQ(std::set<std::size_t>(order.begin(), order.end()).size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t c : t.children(i)) {
        EXPECT_EQ(*t.parent(c), i);
        EXPECT_EQ(t.depth_of(c), t.depth_of(i) + 1);
      }
    }
  }
}
