#include <doctest.h>

#include "preftransfer/pipeline.h"
#include "preftransfer/random.h"

using namespace preftransfer;

namespace {

struct Instance {
  CandidatePool pool;
  PreferenceSet source;
};

Instance make_instance(std::uint64_t seed, std::size_t items, std::size_t sources) {
  Rng rng(seed);
  std::vector<Item> pool_items;
  for (std::size_t j = 0; j < items; ++j) {
    Eigen::VectorXd x(2);
    x << standard_normal(rng), standard_normal(rng);
    pool_items.push_back({std::to_string(j), x});
  }
  std::vector<LabeledPoint> points;
  for (std::size_t i = 0; i < sources; ++i) {
    Eigen::VectorXd x(2);
    x << standard_normal(rng), standard_normal(rng);
    points.emplace_back(std::to_string(i), x, uniform01(rng) < 0.5 ? Label::kUp : Label::kDown, 1.0);
  }
  return {build_candidate_pool(std::move(pool_items), 1.0), PreferenceSet(std::move(points))};
}

}  // namespace

TEST_CASE("mmd transfer returns K items above the continuous value") {
  const Instance inst = make_instance(1, 30, 8);
  RunConfig config;
  config.k = 6;
  config.fw_iterations = 300;
  config.rounding_repeats = 20;
  const TransferResult r = transfer(inst.pool, inst.source, config);
  CHECK(r.metric == Metric::kMmd);
  CHECK(r.outcome.selection.size() == 6);
  CHECK(r.continuous_lower_bound <= r.continuous_value + 1e-12);
  CHECK(r.continuous_value <= r.outcome.distance + 1e-12);
  REQUIRE(r.trace.has_value());
  CHECK(r.trace->iterations == 300);

  const TransferResult again = transfer(inst.pool, inst.source, config);
  CHECK(again.outcome.selection.indices() == r.outcome.selection.indices());
  CHECK(again.outcome.distance == r.outcome.distance);
}

TEST_CASE("w1 transfer uses the exact LP value") {
  const Instance inst = make_instance(2, 12, 5);
  RunConfig config;
  config.k = 4;
  config.metric = Metric::kW1;
  config.rounding_repeats = 10;
  const TransferResult r = transfer(inst.pool, inst.source, config);
  CHECK(r.metric == Metric::kW1);
  CHECK(r.continuous_value == r.continuous_lower_bound);
  CHECK(r.continuous_value <= r.outcome.distance + 1e-12);
  CHECK_FALSE(r.trace.has_value());
}

TEST_CASE("transfer validates its configuration") {
  const Instance inst = make_instance(3, 4, 2);
  RunConfig config;
  config.k = 9;
  CHECK_THROWS_AS(transfer(inst.pool, inst.source, config), std::invalid_argument);
}

TEST_CASE("sweep keeps the K with the smallest achieved distance") {
  const Instance inst = make_instance(4, 20, 6);
  RunConfig config;
  config.fw_iterations = 200;
  config.rounding_repeats = 10;
  const std::vector<int> ks{1, 2, 4, 8};
  const SweepResult s = sweep_k(inst.pool, inst.source, config, ks);
  REQUIRE(s.results.size() == 4);
  for (const TransferResult& r : s.results) {
    CHECK(s.results[s.best].outcome.distance <= r.outcome.distance);
  }
  CHECK_THROWS_AS(sweep_k(inst.pool, inst.source, config, std::vector<int>{}), std::invalid_argument);
}
