#include "mmd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "mmd/parallel.hpp"
#include "mmd/rng.hpp"
#include "mmd/stv.hpp"

namespace mmd {

namespace {

// Children always carry larger ids than their parent, so a reverse sweep
// visits every child before its parent.
template <class Fn>
void bottom_up(const SampleTree& tree, Fn&& fn) {
  for (std::size_t i = tree.size(); i-- > 0;) fn(static_cast<NodeId>(i), tree.node(static_cast<NodeId>(i)));
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricsRecord make_record(int k, const SeatShareRule& rule, std::string statistic, double seats_r, int total_seats,
                          double y_r) {
  const double share = seats_r / total_seats;
  return {k, std::string(rule.name()), std::move(statistic), seats_r, share, std::abs(share - y_r)};
}

}  // namespace

LeafScores score_leaves(const SampleTree& tree, const StateInstance& state, const SeatShareRule& rule,
                        UncertaintyModel u, unsigned threads) {
  std::vector<LeafScore> out(tree.size());
  parallel_for(tree.size(), threads, [&](std::size_t i) {
    const auto& node = tree.node(static_cast<NodeId>(i));
    if (!node.is_leaf()) return;
    LeafScore s;
    s.leaf = static_cast<NodeId>(i);
    s.seats = node.seats;
    s.vote_share = district_vote_share(state, node.region);
    s.expected_r_seats = expected_seats(s.vote_share, node.seats, rule, u);
    s.deterministic_r_seats = seats_for(s.vote_share, node.seats, rule).seats_r;
    out[i] = s;
  });
  return LeafScores(std::move(out), rule, u);
}

PartisanOptimum optimize_partisan(const SampleTree& tree, const StateInstance& state, const LeafScores& scores,
                                  Party party) {
  if (tree.size() == 0) throw InputError("empty tree");
  std::vector<double> value(tree.size(), 0.0);
  std::vector<std::uint32_t> choice(tree.size(), 0);
  bottom_up(tree, [&](NodeId id, const TreeNode& node) {
    if (node.is_leaf()) {
      const auto& s = scores[id];
      value[id] = party == Party::R ? s.expected_r_seats : s.seats - s.expected_r_seats;
      return;
    }
    double best = -1.0;
    for (std::uint32_t k = 0; k < node.samples.size(); ++k) {
      double sum = 0.0;
      for (auto c : node.samples[k]) sum += value[c];
      if (sum > best) {
        best = sum;
        choice[id] = k;
      }
    }
    value[id] = best;
  });

  PartisanOptimum out;
  out.value = value[tree.root()];
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    const auto& node = tree.node(v);
    if (node.is_leaf()) {
      out.leaves.push_back(v);
      out.seats_r += scores[v].deterministic_r_seats;
      continue;
    }
    const auto& s = node.samples[choice[v]];
    for (auto it = s.rbegin(); it != s.rend(); ++it) stack.push_back(*it);
  }
  out.plan = tree.plan_from_leaves(state, out.leaves);
  return out;
}

FairOptimum optimize_fair(const SampleTree& tree, const StateInstance& state, const LeafScores& scores, double y_r) {
  if (tree.size() == 0) throw InputError("empty tree");
  const int n = tree.total_seats();
  using Set = std::vector<char>;  // achievable R-seat totals, indexed 0..n

  auto minkowski = [n](const Set& a, const Set& b) {
    Set out(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i <= n; ++i) {
      if (!a[i]) continue;
      for (int j = 0; i + j <= n; ++j)
        if (b[j]) out[i + j] = 1;
    }
    return out;
  };
  const Set zero = [n] {
    Set s(static_cast<std::size_t>(n) + 1, 0);
    s[0] = 1;
    return s;
  }();

  std::vector<Set> achievable(tree.size());
  bottom_up(tree, [&](NodeId id, const TreeNode& node) {
    Set& set = achievable[id];
    set.assign(static_cast<std::size_t>(n) + 1, 0);
    if (node.is_leaf()) {
      set[scores[id].deterministic_r_seats] = 1;
      return;
    }
    for (const auto& sample : node.samples) {
      Set acc = zero;
      for (auto c : sample) acc = minkowski(acc, achievable[c]);
      for (int t = 0; t <= n; ++t) set[t] |= acc[t];
    }
  });

  const Set& top = achievable[tree.root()];
  int best_t = -1;
  double best_gap = 0.0;
  for (int t = 0; t <= n; ++t) {
    if (!top[t]) continue;
    const double gap = std::abs(static_cast<double>(t) / n - y_r);
    if (best_t < 0 || gap < best_gap - kTieEpsilon) {
      best_t = t;
      best_gap = gap;
    }
  }

  FairOptimum out;
  out.seats_r = best_t;
  out.gap = best_gap;
  // Backtrack a witness: the first sample that reaches the total, then the
  // smallest feasible share for each child in order.
  std::vector<std::pair<NodeId, int>> stack{{tree.root(), best_t}};
  while (!stack.empty()) {
    const auto [v, t] = stack.back();
    stack.pop_back();
    const auto& node = tree.node(v);
    if (node.is_leaf()) {
      out.leaves.push_back(v);
      continue;
    }
    bool found = false;
    for (const auto& sample : node.samples) {
      std::vector<Set> suffix(sample.size() + 1);
      suffix[sample.size()] = zero;
      for (std::size_t i = sample.size(); i-- > 0;) suffix[i] = minkowski(achievable[sample[i]], suffix[i + 1]);
      if (!suffix[0][t]) continue;
      std::vector<std::pair<NodeId, int>> parts;
      int remaining = t;
      for (std::size_t i = 0; i < sample.size(); ++i) {
        for (int ti = 0; ti <= remaining; ++ti) {
          if (achievable[sample[i]][ti] && suffix[i + 1][remaining - ti]) {
            parts.emplace_back(sample[i], ti);
            remaining -= ti;
            break;
          }
        }
      }
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) stack.push_back(*it);
      found = true;
      break;
    }
    if (!found) throw std::logic_error("fair DP backtrack lost its witness");
  }
  out.plan = tree.plan_from_leaves(state, out.leaves);
  return out;
}

int plan_seats_r(const StateInstance& state, const Plan& plan, const SeatShareRule& rule) {
  int total = 0;
  for (const auto& d : plan.districts) total += seats_for(district_vote_share(state, d), d.seats, rule).seats_r;
  return total;
}

EnsembleResult ensemble_metrics(const SampleTree& tree, const StateInstance& state, const SeatShareRule& rule,
                                std::size_t n_samples, std::uint64_t seed) {
  EnsembleResult out;
  out.plans = sample_leaf_sets(tree, n_samples, seed);
  std::unordered_map<NodeId, int> cache;
  auto leaf_seats = [&](NodeId id) {
    auto it = cache.find(id);
    if (it != cache.end()) return it->second;
    const auto& node = tree.node(id);
    const int s = seats_for(district_vote_share(state, node.region), node.seats, rule).seats_r;
    cache.emplace(id, s);
    return s;
  };
  std::vector<double> totals;
  for (const auto& leaves : out.plans) {
    int seats = 0;
    for (auto l : leaves) seats += leaf_seats(l);
    out.seats_r.push_back(seats);
    totals.push_back(seats);
  }
  std::sort(totals.begin(), totals.end());
  const int n = tree.total_seats();
  const double y = state.vote_share_r();
  const int k = tree.districts();
  if (!totals.empty()) {
    out.records.push_back(make_record(k, rule, "min", totals.front(), n, y));
    out.records.push_back(make_record(k, rule, "q25", quantile(totals, 0.25), n, y));
    out.records.push_back(make_record(k, rule, "median", quantile(totals, 0.5), n, y));
    out.records.push_back(make_record(k, rule, "q75", quantile(totals, 0.75), n, y));
    out.records.push_back(make_record(k, rule, "max", totals.back(), n, y));
  }
  return out;
}

SweepResult sweep_k(const StateInstance& state, const SeatShareRule& rule, std::span<const int> k_set,
                    std::uint64_t seed, const SweepOptions& options) {
  SweepResult out;
  const int n = state.total_seats();
  const double y = state.vote_share_r();
  for (int k : k_set) {
    try {
      const auto tree =
          build_tree(state, k, options.tolerance, derive_seed(seed, {static_cast<std::uint64_t>(k)}), options.tree);
      const auto scores = score_leaves(tree, state, rule, options.uncertainty, options.tree.threads);
      const auto max_r = optimize_partisan(tree, state, scores, Party::R);
      const auto max_d = optimize_partisan(tree, state, scores, Party::D);
      auto fair = optimize_fair(tree, state, scores, y);
      const auto ensemble = ensemble_metrics(tree, state, rule, options.ensemble_size,
                                             derive_seed(seed, {static_cast<std::uint64_t>(k), 1}));
      out.records.push_back(make_record(k, rule, "max_R", max_r.seats_r, n, y));
      out.records.push_back(make_record(k, rule, "max_D", max_d.seats_r, n, y));
      out.records.push_back(make_record(k, rule, "min_gap", fair.seats_r, n, y));
      for (const auto& r : ensemble.records) {
        if (r.statistic != "median") continue;
        out.records.push_back(r);
      }
      out.witnesses_fair.push_back(std::move(fair.plan));
    } catch (const std::exception& e) {
      out.failures.push_back({k, e.what()});
    }
  }
  return out;
}

std::string metrics_csv(std::span<const MetricsRecord> records) {
  std::string out = "k,rule,statistic,seats_r,seat_share_r,gap\n";
  for (const auto& r : records)
    out += fmt::format("{},{},{},{},{},{}\n", r.k, r.rule, r.statistic, r.seats_r, r.seat_share_r, r.gap);
  return out;
}

double weighted_stddev(std::span<const double> values, std::span<const double> weights) {
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w += weights[i];
    m += weights[i] * values[i];
  }
  if (w <= 0.0) return 0.0;
  m /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += weights[i] * (values[i] - m) * (values[i] - m);
  return std::sqrt(std::max(0.0, var / w));
}

namespace {

struct WinnerStats {
  Party party;
  double score;
  double coalition_score_sd;
  double coalition_geo;
};

std::vector<WinnerStats> simulate_district(const StateInstance& state, const VoterIndex& index,
                                           const District& district, std::uint64_t seed,
                                           const DiversityOptions& options) {
  std::vector<std::uint32_t> blocks;
  blocks.reserve(district.blocks.size());
  for (auto id : district.blocks) blocks.push_back(static_cast<std::uint32_t>(state.index_of(id)));
  const auto voters = index.in_blocks(blocks);
  const Point centroid = population_centroid(state, blocks);
  const int per_party = options.per_party > 0 ? options.per_party : district.seats + 2;

  const auto candidates = generate_candidates(voters, district.seats, per_party, derive_seed(seed, {1}));
  const auto ballots = build_ballots(voters, candidates, options.mode);
  const auto result = run_stv(ballots, candidates, district.seats, derive_seed(seed, {2}));

  std::unordered_map<VoterId, std::size_t> position;
  position.reserve(voters.size());
  for (std::size_t i = 0; i < voters.size(); ++i) position.emplace(voters[i].id, i);

  std::vector<WinnerStats> out;
  for (std::size_t w = 0; w < result.winners.size(); ++w) {
    const auto& cand = *std::find_if(candidates.begin(), candidates.end(),
                                     [&](const Candidate& c) { return c.id == result.winners[w]; });
    const auto& coalition = result.coalitions[w];
    std::vector<double> scores, weights;
    double geo = 0.0, weight_sum = 0.0;
    for (const auto& m : coalition.members) {
      const auto& v = voters[position.at(m.voter_id)];
      scores.push_back(v.partisan_score);
      weights.push_back(m.weight);
      geo += m.weight * distance(v.location, centroid);
      weight_sum += m.weight;
    }
    out.push_back({cand.party, cand.score, weighted_stddev(scores, weights), weight_sum > 0 ? geo / weight_sum : 0.0});
  }
  return out;
}

}  // namespace

std::vector<DiversityRecord> intra_party_analysis(const StateInstance& state, std::span<const Plan> plans,
                                                  const VoterFile& voters, std::uint64_t seed,
                                                  const DiversityOptions& options) {
  const VoterIndex index(state, voters);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t p = 0; p < plans.size(); ++p)
    for (std::size_t d = 0; d < plans[p].districts.size(); ++d) tasks.emplace_back(p, d);

  std::vector<std::vector<WinnerStats>> results(tasks.size());
  parallel_for(tasks.size(), options.threads, [&](std::size_t t) {
    const auto [p, d] = tasks[t];
    results[t] = simulate_district(state, index, plans[p].districts[d],
                                   derive_seed(seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(d)}),
                                   options);
  });

  std::vector<DiversityRecord> out;
  const int k = plans.empty() ? 0 : static_cast<int>(plans.front().districts.size());
  for (Party party : {Party::R, Party::D}) {
    DiversityRecord rec;
    rec.k = k;
    rec.party = party;
    std::size_t t = 0;
    for (std::size_t p = 0; p < plans.size(); ++p) {
      std::vector<double> scores;
      double coalition_sd = 0.0, geo = 0.0;
      for (std::size_t d = 0; d < plans[p].districts.size(); ++d, ++t) {
        for (const auto& w : results[t]) {
          if (w.party != party) continue;
          scores.push_back(w.score);
          coalition_sd += w.coalition_score_sd;
          geo += w.coalition_geo;
        }
      }
      if (scores.empty()) continue;
      const std::vector<double> ones(scores.size(), 1.0);
      const double count = static_cast<double>(scores.size());
      rec.winner_score_stddev += weighted_stddev(scores, ones);
      rec.coalition_score_stddev += coalition_sd / count;
      rec.coalition_geo_dispersion += geo / count;
      ++rec.plans;
    }
    if (rec.plans == 0) continue;
    const double n = static_cast<double>(rec.plans);
    rec.winner_score_stddev /= n;
    rec.coalition_score_stddev /= n;
    rec.coalition_geo_dispersion /= n;
    out.push_back(rec);
  }
  return out;
}

std::string diversity_csv(std::span<const DiversityRecord> records) {
  std::string out = "k,party,winner_score_stddev,coalition_score_stddev,coalition_geo_km\n";
  for (const auto& r : records)
    out += fmt::format("{},{},{},{},{}\n", r.k, party_name(r.party), r.winner_score_stddev, r.coalition_score_stddev,
                       r.coalition_geo_dispersion);
  return out;
}

}  // namespace mmd
