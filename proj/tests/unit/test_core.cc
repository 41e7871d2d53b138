#include <doctest.h>

#include <set>
#include <stdexcept>

#include "preftransfer/core.h"

using namespace preftransfer;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("labeled point appends the scaled label") {
  const LabeledPoint up("a", vec({0.5, 2.0}), Label::kUp, 10.0);
  CHECK(up.dim() == 3);
  CHECK(up.raw_dim() == 2);
  CHECK(up.embedding()[0] == 0.5);
  CHECK(up.embedding()[1] == 2.0);
  CHECK(up.embedding()[2] == 10.0);
  const LabeledPoint down("a", vec({0.5, 2.0}), Label::kDown, 10.0);
  CHECK(down.embedding()[2] == 0.0);
  CHECK_THROWS_AS(LabeledPoint("x", Eigen::VectorXd(0), Label::kUp), std::invalid_argument);
  CHECK_THROWS_AS(label_from_int(2), std::invalid_argument);
  CHECK(label_from_int(1) == Label::kUp);
}

TEST_CASE("preference set rejects empty and ragged input") {
  CHECK_THROWS_AS(PreferenceSet({}), std::invalid_argument);
  std::vector<LabeledPoint> ragged{LabeledPoint("a", vec({1.0}), Label::kUp),
                                   LabeledPoint("b", vec({1.0, 2.0}), Label::kUp)};
  CHECK_THROWS_AS(PreferenceSet(std::move(ragged)), std::invalid_argument);
  const PreferenceSet ok({LabeledPoint("a", vec({1.0}), Label::kUp),
                          LabeledPoint("b", vec({3.0}), Label::kDown)});
  CHECK(ok.size() == 2);
  CHECK(ok.embeddings().rows() == 2);
  CHECK(ok.embeddings()(0, 1) == doctest::Approx(kDefaultLabelScale));
}

TEST_CASE("one item doubles into an up and a down candidate") {
  const CandidatePool pool = build_candidate_pool({{"i0", vec({0.5})}}, 10.0);
  REQUIRE(pool.size() == 2);
  CHECK(pool.embeddings()(0, 0) == 0.5);
  CHECK(pool.embeddings()(0, 1) == 10.0);
  CHECK(pool.embeddings()(1, 0) == 0.5);
  CHECK(pool.embeddings()(1, 1) == 0.0);
}

TEST_CASE("pool of three items has six candidates in item order, up first") {
  const CandidatePool pool =
      build_candidate_pool({{"a", vec({1.0})}, {"b", vec({2.0})}, {"c", vec({3.0})}});
  REQUIRE(pool.size() == 6);
  for (std::size_t c = 0; c < 6; ++c) {
    const LabeledPoint& p = pool.candidates()[c];
    CHECK(p.item_id() == pool.items()[c / 2].id);
    CHECK(p.label() == (c % 2 == 0 ? Label::kUp : Label::kDown));
    CHECK(CandidatePool::item_index(c) == c / 2);
    CHECK(CandidatePool::label_of(c) == p.label());
    CHECK(CandidatePool::sibling(CandidatePool::sibling(c)) == c);
    CHECK(p.features() == pool.candidates()[CandidatePool::sibling(c)].features());
  }
  // Collapsing candidates by item id gives back the input items.
  std::set<std::string> ids;
  for (const LabeledPoint& p : pool.candidates()) ids.insert(p.item_id());
  CHECK(ids == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("pool construction errors") {
  CHECK_THROWS_AS(build_candidate_pool({}), std::invalid_argument);
  CHECK_THROWS_AS(build_candidate_pool({{"a", vec({1.0})}, {"b", vec({1.0, 2.0})}}),
                  std::invalid_argument);
}

TEST_CASE("uniform capped weights") {
  const CappedWeights w = uniform_capped_weights(4, 2);
  for (std::size_t j = 0; j < 4; ++j) CHECK(w[j] == 0.25);
  const CappedWeights edge = uniform_capped_weights(2, 2);
  CHECK(edge[0] == 0.5);
  CHECK(edge[1] == 0.5);
  CHECK_THROWS_AS(uniform_capped_weights(4, 5), std::invalid_argument);
  CHECK_THROWS_AS(uniform_capped_weights(4, 0), std::invalid_argument);
}

TEST_CASE("capped weights check sum and box") {
  CHECK(CappedWeights::feasible(vec({0.5, 0.5, 0.0}), 2));
  CHECK_FALSE(CappedWeights::feasible(vec({0.6, 0.4, 0.0}), 2));
  CHECK_FALSE(CappedWeights::feasible(vec({0.5, 0.4, 0.0}), 2));
  CHECK_FALSE(CappedWeights::feasible(vec({0.5, 0.6, -0.1}), 2));
  CHECK(CappedWeights::feasible(vec({0.5 + 1e-13, 0.5 - 1e-13}), 2));
  CHECK_THROWS_AS(CappedWeights(vec({0.7, 0.3}), 2), std::invalid_argument);
}

TEST_CASE("selection keeps sorted distinct indices") {
  const Selection s({4, 1, 2}, 6, 3);
  CHECK(s.indices() == std::vector<std::size_t>{1, 2, 4});
  CHECK(s.complete());
  CHECK(s.contains(2));
  CHECK_FALSE(s.contains(3));
  const Eigen::VectorXd w = s.weights();
  CHECK(w.sum() == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0));
  CHECK(w[0] == 0.0);
  CHECK_THROWS_AS(Selection({1, 1}, 6, 2), std::invalid_argument);
  CHECK_THROWS_AS(Selection({6}, 6, 1), std::invalid_argument);
}

TEST_CASE("run config validation") {
  RunConfig c;
  c.k = 3;
  CHECK_NOTHROW(c.validate(6));
  CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
  c.exclusive_labels = true;
  CHECK_NOTHROW(c.validate(6));
  CHECK_THROWS_AS(c.validate(4), std::invalid_argument);
  c = RunConfig{};
  c.k = 1;
  c.fw_iterations = 0;
  CHECK_THROWS_AS(c.validate(4), std::invalid_argument);
  c.fw_iterations = 1;
  c.rounding_repeats = 0;
  CHECK_THROWS_AS(c.validate(4), std::invalid_argument);
  CHECK(parse_metric("w1") == Metric::kW1);
  CHECK(std::string(metric_name(Metric::kMmd)) == "mmd");
  CHECK_THROWS_AS(parse_metric("tv"), std::invalid_argument);
}
