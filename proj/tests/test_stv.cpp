#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mmd/social_choice.hpp"
#include "mmd/stv.hpp"
#include "support.hpp"

using namespace mmd;

namespace {

// R1=0, R2=1, D1=2.
std::vector<Candidate> nine_ballot_candidates() {
  return {{0, Party::R, 0.0, {}}, {1, Party::R, 0.0, {}}, {2, Party::D, 0.0, {}}};
}

std::vector<Ballot> nine_ballots() {
  std::vector<Ballot> out;
  for (int v = 0; v < 6; ++v) out.push_back({v, {0, 1, 2}, 1.0});
  for (int v = 6; v < 9; ++v) out.push_back({v, {2, 0, 1}, 1.0});
  return out;
}

void check_conservation(const ElectionResult& r) {
  for (const auto& round : r.rounds) {
    const double sum = round.continuing_weight + round.retained_weight + round.exhausted_weight;
    CHECK(std::abs(sum - r.total_weight) < 1e-9);
  }
}

}  // namespace

TEST_CASE("droop_quota examples") {
  CHECK(droop_quota(100, 4) == 21);
  CHECK(droop_quota(9, 2) == 4);
  CHECK(droop_quota(1, 1) == 1);
}

TEST_CASE("nine-ballot hand trace") {
  const auto cands = nine_ballot_candidates();
  const auto ballots = nine_ballots();
  const auto r = run_stv(ballots, cands, 2, 1);
  CHECK(r.quota == 4);
  REQUIRE(r.rounds.size() == 3);

  // Round 1: R1 has 6 >= 4, surplus 3, factor 1/2.
  CHECK(r.rounds[0].elected == std::vector<CandidateId>{0});
  REQUIRE(r.rounds[0].transfer_factors.size() == 1);
  CHECK(r.rounds[0].transfer_factors[0].votes == doctest::Approx(0.5));

  // Round 2: R2 and D1 tie at 3; R is eliminated first.
  for (const auto& t : r.rounds[1].tallies) CHECK(t.votes == doctest::Approx(3.0));
  CHECK(r.rounds[1].eliminated == 1);

  // Round 3: D1 collects the transferred halves and reaches quota.
  CHECK(r.rounds[2].quota_reachers == std::vector<CandidateId>{2});
  CHECK(r.winners == std::vector<CandidateId>{0, 2});
  CHECK(partisan_split(r, cands) == SeatOutcome{1, 1});
  CHECK(r.quota_reachers == 2);

  // The hand trace does not depend on the tie-break seed.
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(run_stv(ballots, cands, 2, seed).winners == r.winners);
  check_conservation(r);
}

TEST_CASE("coalitions carry election-time weights") {
  const auto cands = nine_ballot_candidates();
  const auto r = run_stv(nine_ballots(), cands, 2, 1);
  REQUIRE(r.coalitions.size() == 2);
  const auto& r1 = r.coalitions[0];
  CHECK(r1.members.size() == 6);
  double sum = 0.0;
  for (const auto& m : r1.members) sum += m.weight;
  CHECK(sum == doctest::Approx(r1.votes));
  CHECK(r1.votes == doctest::Approx(6.0));
  const auto& d1 = r.coalitions[1];
  double dsum = 0.0;
  for (const auto& m : d1.members) dsum += m.weight;
  CHECK(d1.members.size() == 9);
  CHECK(dsum == doctest::Approx(6.0));
  CHECK(dsum >= r.quota - 1);
}

TEST_CASE("single seat with three first preferences") {
  std::vector<Candidate> cands{{0, Party::R, 0, {}}, {1, Party::D, 0, {}}, {2, Party::D, 0, {}}};
  std::vector<Ballot> ballots{{0, {0, 1, 2}, 1.0}, {1, {1, 2, 0}, 1.0}, {2, {2, 1, 0}, 1.0}};
  const auto r = run_stv(ballots, cands, 1, 3);
  CHECK(r.quota == 2);
  REQUIRE(r.winners.size() == 1);
  double sum = 0.0;
  for (const auto& m : r.coalitions[0].members) sum += m.weight;
  CHECK(sum >= r.quota - 1);
  check_conservation(r);
}

TEST_CASE("partisan_split examples") {
  std::vector<Candidate> cands{{0, Party::R, 0, {}}, {1, Party::D, 0, {}}, {2, Party::D, 0, {}}};
  ElectionResult r;
  r.winners = {0, 1};
  CHECK(partisan_split(r, cands) == SeatOutcome{1, 1});
  r.winners = {1, 2, 0};
  CHECK(partisan_split(r, cands) == SeatOutcome{1, 2});
  r.winners.clear();
  CHECK_THROWS_AS(partisan_split(r, cands), InputError);
}

TEST_CASE("run_stv rejects malformed input") {
  const auto cands = nine_ballot_candidates();
  CHECK_THROWS_AS(run_stv(nine_ballots(), cands, 4, 1), InputError);
  CHECK_THROWS_AS(run_stv(nine_ballots(), cands, 0, 1), InputError);
  std::vector<Ballot> unknown{{0, {0, 7}, 1.0}};
  CHECK_THROWS_AS(run_stv(unknown, cands, 1, 1), InputError);
  std::vector<Ballot> repeated{{0, {0, 0}, 1.0}};
  CHECK_THROWS_AS(run_stv(repeated, cands, 1, 1), InputError);
  std::vector<Ballot> heavy{{0, {0}, 1.5}};
  CHECK_THROWS_AS(run_stv(heavy, cands, 1, 1), InputError);
  auto dup = cands;
  dup[1].id = 0;
  CHECK_THROWS_AS(run_stv(nine_ballots(), dup, 1, 1), InputError);
}

TEST_CASE("party-line profiles reproduce the closed form") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = static_cast<int>(uniform_int(rng, 1, 5));
    const int v = static_cast<int>(uniform_int(rng, 1, 400));
    const int n_r = static_cast<int>(uniform_int(rng, 0, v));
    // Divisible electorates keep the quota arithmetic exact.
    const int vv = v - v % (m + 1) + (m + 1);
    const auto p = test::party_line_profile(rng, m, vv, std::min(n_r, vv));
    const auto r = run_stv(p.ballots, p.candidates, m, static_cast<std::uint64_t>(trial));
    const double y = static_cast<double>(p.n_r) / vv;
    CHECK(partisan_split(r, p.candidates) == stv_seats(y, m));
    CHECK(r.quota_reachers <= m);
    check_conservation(r);
  }
}

TEST_CASE("fuzzed elections conserve weight and respect quota occupancy") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n_c = static_cast<int>(uniform_int(rng, 2, 8));
    const int m = static_cast<int>(uniform_int(rng, 1, n_c));
    std::vector<Candidate> cands;
    for (int c = 0; c < n_c; ++c) cands.push_back({c, uniform01(rng) < 0.5 ? Party::R : Party::D, 0, {}});
    std::vector<Ballot> ballots;
    const int v = static_cast<int>(uniform_int(rng, 1, 200));
    for (int b = 0; b < v; ++b) {
      std::vector<CandidateId> order(static_cast<std::size_t>(n_c));
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);
      order.resize(static_cast<std::size_t>(uniform_int(rng, 1, n_c)));
      ballots.push_back({b, order, 1.0});
    }
    const auto r = run_stv(ballots, cands, m, static_cast<std::uint64_t>(trial));
    CHECK(static_cast<int>(r.winners.size()) == m);
    check_conservation(r);
    for (const auto& c : r.coalitions) {
      double sum = 0.0;
      for (const auto& mbr : c.members) sum += mbr.weight;
      CHECK(sum == doctest::Approx(c.votes));
      if (c.by_quota) CHECK(c.votes >= r.quota - 1 - 1e-9);
    }
  }
}

TEST_CASE("run_stv is deterministic given the seed") {
  Rng rng(3);
  const auto p = test::party_line_profile(rng, 4, 300, 131);
  CHECK(run_stv(p.ballots, p.candidates, 4, 9) == run_stv(p.ballots, p.candidates, 4, 9));
  CHECK(round_log_jsonl(run_stv(p.ballots, p.candidates, 4, 9)) ==
        round_log_jsonl(run_stv(p.ballots, p.candidates, 4, 9)));
}

TEST_CASE("ballot and candidate CSV round trip") {
  const auto ballots = nine_ballots();
  const auto back = parse_ballots_csv(ballots_to_csv(ballots));
  REQUIRE(back.size() == ballots.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].voter_id == ballots[i].voter_id);
    CHECK(back[i].ranking == ballots[i].ranking);
    CHECK(back[i].weight == ballots[i].weight);
  }
  const auto cands = nine_ballot_candidates();
  const auto cback = parse_candidates_csv(candidates_to_csv(cands));
  REQUIRE(cback.size() == 3);
  CHECK(cback[2].party == Party::D);
  CHECK_THROWS_AS(parse_ballots_csv("voter_id,weight,ranking\n1,abc,0;1\n"), InputError);
}

TEST_CASE("round log is one JSON object per round") {
  const auto r = run_stv(nine_ballots(), nine_ballot_candidates(), 2, 1);
  const auto log = round_log_jsonl(r);
  CHECK(std::count(log.begin(), log.end(), '\n') == static_cast<long>(r.rounds.size()));
  CHECK(log.rfind("{\"", 0) == 0);
}
