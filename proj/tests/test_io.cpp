#include <gtest/gtest.h>

#include <fstream>
#include <functional>

#include "cstree/io.hpp"
#include "support.hpp"

using namespace cstree;
using nlohmann::json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(TreeDocument, RoundTrip) {
  const DirectedTree t = fixtures::fork_tree();
  const WeightAssignment w{{"1,1", Complex(1.0, -0.5)}, {"2,1", 1.0}, {"2,2", std::sqrt(2.0)}};
  const json doc = io::to_json(t, w);
  const io::TreeDocument back = io::tree_from_json(json::parse(doc.dump()));
  const DirectedTree t2(back.spec);
  EXPECT_EQ(t2.vertices(), t.vertices());
  EXPECT_EQ(t2.root(), t.root());
  ASSERT_TRUE(back.weights.has_value());
  EXPECT_EQ(*back.weights, w);
}

TEST(TreeDocument, ArrayEdgesAndNumericWeights) {
  const json doc = json::parse(R"({"vertices":["0","1"],"root":"0","edges":[["0","1"]],"weights":{"1":2.5}})");
  const io::TreeDocument d = io::tree_from_json(doc);
  ASSERT_EQ(d.spec.edges.size(), 1u);
  EXPECT_EQ(d.spec.edges[0].child, "1");
  EXPECT_EQ(d.weights->at("1"), Complex(2.5));
}

TEST(TreeDocument, ErrorsNameTheField) {
  EXPECT_NE(error_of([] { io::tree_from_json(json::parse(R"({"root":"0","edges":[]})")); }).find("field 'vertices'"),
            std::string::npos);
  EXPECT_NE(error_of([] { io::tree_from_json(json::parse(R"({"vertices":["0"],"root":0,"edges":[]})")); })
                .find("field 'root'"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              io::tree_from_json(json::parse(R"({"vertices":["0","1"],"root":"0","edges":[{"parent":"0"}]})"));
            }).find("field 'edges[0].child'"),
            std::string::npos);
  EXPECT_NE(error_of([] {
              io::tree_from_json(
                  json::parse(R"({"vertices":["0","1"],"root":"0","edges":[["0","1"]],"weights":{"1":"big"}})"));
            }).find("field 'weights.1'"),
            std::string::npos);
  EXPECT_NE(error_of([] { io::tree_from_json(json::parse("[]")); }).find("<document>"), std::string::npos);
}

TEST(Matrix, RoundTripIsExact) {
  std::mt19937_64 rng(61);
  const Matrix m = fixtures::random_matrix(rng, 3, 4);
  const json doc = io::matrix_to_json(m, {"a", "b", "c"});
  EXPECT_EQ(io::matrix_from_json(json::parse(doc.dump())), m);
}

TEST(Matrix, ShapeErrors) {
  const json bad = json::parse(R"({"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0]]})");
  EXPECT_THROW(io::matrix_from_json(bad), InputError);
}

TEST(Conjugation, RoundTripRevalidates) {
  const DirectedTree t = fixtures::fork_tree();
  const Conjugation c = from_basis_images(fixtures::fork_images(t), t.vertices());
  const Conjugation back = io::conjugation_from_json(json::parse(io::to_json(c).dump()));
  EXPECT_EQ(back.matrix(), c.matrix());
  EXPECT_EQ(back.basis(), c.basis());

  json broken = io::to_json(c);
  broken["A"]["data"][0] = json::array({5.0, 0.0});
  EXPECT_THROW(io::conjugation_from_json(broken), ConjugationError);
}

TEST(Verdict, JsonCarriesEvidence) {
  const ShiftMatrix s = build_shift(fixtures::stem_fork_tree(), fixtures::stem_fork_weights());
  const json j = io::to_json(decide_cs(s.matrix, s.basis));
  EXPECT_EQ(j["verdict"], "not_cs");
  EXPECT_EQ(j["obstruction"]["kind"], "word_trace");
  EXPECT_TRUE(j["certificate"].is_null());
  EXPECT_FALSE(j.contains("elapsed_seconds"));

  const ShiftMatrix s1 = build_shift(fixtures::fork_tree(), fixtures::fork_weights());
  const json k = io::to_json(decide_cs(s1.matrix, s1.basis));
  EXPECT_EQ(k["verdict"], "cs");
  EXPECT_FALSE(k["certificate"].is_null());
  EXPECT_EQ(io::dump(k), io::dump(io::to_json(decide_cs(s1.matrix, s1.basis))));
}

TEST(Numbers, NonFiniteBecomesNull) {
  EXPECT_TRUE(io::number(std::nan("")).is_null());
  EXPECT_TRUE(io::number(INFINITY).is_null());
  EXPECT_EQ(io::number(0.5), json(0.5));
  EXPECT_EQ(io::complex_from_json(json::parse("[1, -2]"), "x"), Complex(1.0, -2.0));
  EXPECT_THROW(io::complex_from_json(json::parse("[1]"), "x"), InputError);
}

TEST(DataFiles, ShippedDocumentsParse) {
  for (const char* name : {"fork_cs.json", "stem_fork_not_cs.json", "missing_weight.json"}) {
    std::ifstream in(std::string(CSTREE_DATA_DIR) + "/" + name);
    ASSERT_TRUE(in) << name;
    const io::TreeDocument d = io::tree_from_json(json::parse(in));
    EXPECT_TRUE(validate_tree(d.spec).ok()) << name;
  }
}
