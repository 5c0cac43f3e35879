#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "mmd/analysis.hpp"
#include "mmd/rng.hpp"
#include "mmd/social_choice.hpp"
#include "mmd/stv.hpp"
#include "mmd/synth.hpp"
#include "mmd/tree.hpp"

using namespace mmd;

namespace {

// Party-line profile: R candidates 0..m-1, D candidates m..2m-1.
void party_line(int m, int v, double y, std::vector<Ballot>& ballots, std::vector<Candidate>& cands) {
  for (int c = 0; c < 2 * m; ++c) cands.push_back({c, c < m ? Party::R : Party::D, 0, {}});
  Rng rng(11);
  for (int b = 0; b < v; ++b) {
    const bool r = b < static_cast<int>(y * v);
    std::vector<CandidateId> own(static_cast<std::size_t>(m)), other(static_cast<std::size_t>(m));
    std::iota(own.begin(), own.end(), r ? 0 : m);
    std::iota(other.begin(), other.end(), r ? m : 0);
    for (auto* list : {&own, &other})
      for (std::size_t i = list->size(); i > 1; --i)
        std::swap((*list)[i - 1], (*list)[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);
    own.insert(own.end(), other.begin(), other.end());
    ballots.push_back({b, own, 1.0});
  }
}

void BM_RunStv(benchmark::State& st) {
  const int m = static_cast<int>(st.range(0));
  const int v = static_cast<int>(st.range(1));
  std::vector<Ballot> ballots;
  std::vector<Candidate> cands;
  party_line(m, v, 0.45, ballots, cands);
  for (auto _ : st) benchmark::DoNotOptimize(run_stv(ballots, cands, m, 3));
  st.SetItemsProcessed(st.iterations() * v);
}
BENCHMARK(BM_RunStv)->Args({3, 2000})->Args({5, 2000})->Args({5, 20000});

void BM_ThieleSeats(benchmark::State& st) {
  const SeatShareRule rule(RuleKind::pav);
  const int m = static_cast<int>(st.range(0));
  double y = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(thiele_seats(y, m, rule));
    y = y > 1.0 ? 0.0 : y + 0.001;
  }
}
BENCHMARK(BM_ThieleSeats)->Arg(1)->Arg(5)->Arg(20);

void BM_ExpectedSeats(benchmark::State& st) {
  const SeatShareRule rule(RuleKind::stv);
  double y = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(expected_seats(y, 6, rule, {0.05}));
    y = y > 1.0 ? 0.0 : y + 0.001;
  }
}
BENCHMARK(BM_ExpectedSeats);

void BM_BuildTree(benchmark::State& st) {
  const auto s = generate_synthetic_state({144, 6, 0.45, 1.0, 3});
  const int k = static_cast<int>(st.range(0));
  std::uint64_t seed = 1;
  for (auto _ : st) benchmark::DoNotOptimize(build_tree(s, k, BalanceTolerance{}, seed++));
}
BENCHMARK(BM_BuildTree)->Arg(1)->Arg(2)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_OptimizeFair(benchmark::State& st) {
  const auto s = generate_synthetic_state({144, 6, 0.45, 1.0, 3});
  const auto tree = build_tree(s, static_cast<int>(st.range(0)), BalanceTolerance{}, 5);
  const SeatShareRule rule(RuleKind::stv);
  const auto scores = score_leaves(tree, s, rule, {0.05}, 1);
  for (auto _ : st) benchmark::DoNotOptimize(optimize_fair(tree, s, scores, s.vote_share_r()));
}
BENCHMARK(BM_OptimizeFair)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
