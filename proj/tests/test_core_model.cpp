#include <doctest.h>

#include <algorithm>
#include <string>

#include "mmd/io.hpp"
#include "mmd/plan.hpp"
#include "mmd/synth.hpp"
#include "support.hpp"

using namespace mmd;

namespace {

const char* kFourBlocks = R"({
  "total_seats": 2,
  "blocks": [
    {"id": 10, "population": 5, "votes_r": 3, "votes_d": 2, "x": 0, "y": 0, "neighbors": [11, 12]},
    {"id": 11, "population": 5, "votes_r": 1, "votes_d": 4, "x": 1, "y": 0, "neighbors": [10, 13]},
    {"id": 12, "population": 5, "votes_r": 2, "votes_d": 2, "x": 0, "y": 1, "neighbors": [10, 13]},
    {"id": 13, "population": 5, "votes_r": 0, "votes_d": 5, "x": 1, "y": 1, "neighbors": [11, 12]}
  ]
})";

bool has_kind(const std::vector<Violation>& vs, ViolationKind k) {
  return std::any_of(vs.begin(), vs.end(), [k](const Violation& v) { return v.kind == k; });
}

double block_share(const StateInstance& s, std::size_t i) {
  return s.block(i).votes_r / (s.block(i).votes_r + s.block(i).votes_d);
}

double morans_i(const StateInstance& s) {
  const auto n = s.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += block_share(s, i);
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0, w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = block_share(s, i) - mean;
    den += di * di;
    for (auto j : s.neighbors(i)) {
      num += di * (block_share(s, j) - mean);
      w += 1.0;
    }
  }
  return (static_cast<double>(n) / w) * num / den;
}

}  // namespace

TEST_CASE("load_state parses the schema") {
  const auto s = parse_state(kFourBlocks);
  CHECK(s.size() == 4);
  CHECK(s.total_seats() == 2);
  CHECK(s.total_population() == 20);
  CHECK(s.vote_share_r() == doctest::Approx(6.0 / 19.0));
  CHECK(parse_state(state_to_json(s)) == s);
}

TEST_CASE("load_state rejects asymmetric adjacency") {
  std::string text = kFourBlocks;
  text.replace(text.find("[10, 13]}"), 9, "[13]}    ");
  CHECK_THROWS_WITH_AS(parse_state(text), doctest::Contains("asymmetric"), InputError);
}

TEST_CASE("load_state rejects disconnected graphs") {
  const char* two_components = R"({"total_seats": 1, "blocks": [
    {"id": 1, "population": 1, "votes_r": 1, "votes_d": 1, "x": 0, "y": 0, "neighbors": [2]},
    {"id": 2, "population": 1, "votes_r": 1, "votes_d": 1, "x": 1, "y": 0, "neighbors": [1]},
    {"id": 3, "population": 1, "votes_r": 1, "votes_d": 1, "x": 5, "y": 0, "neighbors": [4]},
    {"id": 4, "population": 1, "votes_r": 1, "votes_d": 1, "x": 6, "y": 0, "neighbors": [3]}]})";
  CHECK_THROWS_WITH_AS(parse_state(two_components), doctest::Contains("disconnected"), InputError);
}

TEST_CASE("load_state rejects duplicate ids and bad fields") {
  std::string dup = kFourBlocks;
  dup.replace(dup.find("\"id\": 13"), 8, "\"id\": 12");
  CHECK_THROWS_AS(parse_state(dup), InputError);
  CHECK_THROWS_AS(parse_state("{\"total_seats\": 1}"), InputError);
  CHECK_THROWS_AS(parse_state("not json"), InputError);
  CHECK_THROWS_AS(load_state("/nonexistent/state.json"), InputError);
}

TEST_CASE("district_vote_share examples") {
  std::vector<Block> blocks{{1, 10, 30, 70, {}}, {2, 10, 10, 90, {}}, {3, 10, 0, 0, {}}, {4, 10, 1, 0, {}}};
  const StateInstance s(blocks, {{2}, {1, 3}, {2, 4}, {3}}, 1);
  CHECK(district_vote_share(s, District{{1, 2}, 1}) == doctest::Approx(0.20));
  CHECK(district_vote_share(s, District{{3}, 1}) == 0.5);
  CHECK(district_vote_share(s, District{{4}, 1}) == 1.0);
  CHECK_THROWS_AS(district_vote_share(s, District{{99}, 1}), InputError);
}

TEST_CASE("district_vote_share is order invariant and matches direct summation") {
  const auto s = generate_synthetic_state({64, 4, 0.45, 1.0, 3});
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    District d;
    double r = 0, t = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (uniform01(rng) < 0.5) continue;
      d.blocks.push_back(s.block(i).id);
      r += s.block(i).votes_r;
      t += s.block(i).votes_r + s.block(i).votes_d;
    }
    if (d.blocks.empty()) continue;
    const double a = district_vote_share(s, d);
    std::reverse(d.blocks.begin(), d.blocks.end());
    CHECK(district_vote_share(s, d) == doctest::Approx(a).epsilon(1e-12));
    CHECK(a == doctest::Approx(r / t).epsilon(1e-12));
  }
}

TEST_CASE("validate_plan examples") {
  const auto s = test::uniform_grid(3, 3, 7);
  Plan whole;
  whole.districts.push_back({{}, 7});
  for (std::size_t i = 0; i < s.size(); ++i) whole.districts[0].blocks.push_back(s.block(i).id);
  CHECK(validate_plan(s, whole).empty());

  auto missing = whole;
  missing.districts[0].blocks.pop_back();
  CHECK(has_kind(validate_plan(s, missing), ViolationKind::missing_block));

  // N=7, K=3 must be sizes {2,2,3}; {3,3,1} is rejected on size allocation.
  const auto row = test::uniform_grid(1, 7, 7);
  Plan bad{{{{0, 1, 2}, 3}, {{3, 4, 5}, 3}, {{6}, 1}}};
  CHECK(has_kind(validate_plan(row, bad), ViolationKind::size_allocation));
  Plan good{{{{0, 1}, 2}, {{2, 3}, 2}, {{4, 5, 6}, 3}}};
  CHECK(validate_plan(row, good).empty());
}

TEST_CASE("validate_plan reports contiguity, balance and seat totals") {
  const auto s = test::uniform_grid(2, 2, 2);
  Plan diagonal{{{{0, 3}, 1}, {{1, 2}, 1}}};
  CHECK(has_kind(validate_plan(s, diagonal), ViolationKind::contiguity));
  Plan lopsided{{{{0}, 1}, {{1, 2, 3}, 1}}};
  CHECK(has_kind(validate_plan(s, lopsided), ViolationKind::balance));
  Plan wrong_total{{{{0, 1}, 1}, {{2, 3}, 2}}};
  CHECK(has_kind(validate_plan(s, wrong_total), ViolationKind::seat_total));
  Plan dup{{{{0, 1}, 1}, {{1, 2, 3}, 1}}};
  CHECK(has_kind(validate_plan(s, dup), ViolationKind::duplicate_block));
  CHECK(has_kind(validate_plan(s, Plan{}), ViolationKind::empty_plan));
}

TEST_CASE("balance tolerance bounds") {
  CHECK_THROWS_AS(BalanceTolerance(1.0), InputError);
  CHECK_THROWS_AS(BalanceTolerance(-0.1), InputError);
  // target share 1/2 with eps 0.01: allowed deviation 0.005 of the population
  CHECK(within_balance(5050, 1, 10000, 2, BalanceTolerance(0.01)));
  CHECK_FALSE(within_balance(5051, 1, 10000, 2, BalanceTolerance(0.01)));
}

TEST_CASE("plan JSON round trip") {
  Plan p{{{{3, 1}, 2}, {{7}, 1}}};
  const auto q = parse_plan(plan_to_json(p));
  REQUIRE(q.districts.size() == 2);
  CHECK(q.districts[0].seats == 2);
  CHECK(q.districts[1].blocks == std::vector<BlockId>{7});
}

TEST_CASE("synthetic state matches the requested share") {
  const auto s = generate_synthetic_state({100, 4, 0.4, 0.0, 7});
  CHECK(s.size() == 100);
  CHECK(s.total_seats() == 4);
  CHECK(s.vote_share_r() >= 0.39);
  CHECK(s.vote_share_r() <= 0.41);
}

TEST_CASE("spatial correlation raises neighbour autocorrelation") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto flat = generate_synthetic_state({144, 6, 0.5, 0.0, seed});
    const auto smooth = generate_synthetic_state({144, 6, 0.5, 10.0, seed});
    CHECK(morans_i(smooth) > morans_i(flat));
  }
}

TEST_CASE("synthetic generation is reproducible") {
  const SynthParams p{144, 6, 0.45, 2.0, 11};
  CHECK(state_to_json(generate_synthetic_state(p)) == state_to_json(generate_synthetic_state(p)));
  CHECK_THROWS_AS(generate_synthetic_state({100, 4, 1.5, 0.0, 1}), InputError);
  CHECK_THROWS_AS(generate_synthetic_state({100, 0, 0.5, 0.0, 1}), InputError);
}
