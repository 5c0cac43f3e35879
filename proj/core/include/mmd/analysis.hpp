#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmd/plan.hpp"
#include "mmd/social_choice.hpp"
#include "mmd/state.hpp"
#include "mmd/tree.hpp"
#include "mmd/voters.hpp"

namespace mmd {

struct LeafScore {
  NodeId leaf = 0;
  double vote_share = 0.5;
  double expected_r_seats = 0.0;
  int deterministic_r_seats = 0;
  int seats = 0;
};

/// Scores indexed by node id; only leaf entries are meaningful.
class LeafScores {
 public:
  LeafScores() = default;
  explicit LeafScores(std::vector<LeafScore> by_node, SeatShareRule rule, UncertaintyModel u)
      : by_node_(std::move(by_node)), rule_(rule), u_(u) {}
  const LeafScore& operator[](NodeId id) const { return by_node_[id]; }
  std::size_t size() const { return by_node_.size(); }
  SeatShareRule rule() const { return rule_; }
  UncertaintyModel uncertainty() const { return u_; }

 private:
  std::vector<LeafScore> by_node_;
  SeatShareRule rule_;
  UncertaintyModel u_;
};

LeafScores score_leaves(const SampleTree& tree, const StateInstance& state, const SeatShareRule& rule,
                        UncertaintyModel u, unsigned threads = 1);

struct PartisanOptimum {
  Plan plan;
  std::vector<NodeId> leaves;
  /// Expected seats for the target party, summed over the chosen leaves.
  double value = 0.0;
  /// Deterministic R seats of the chosen plan.
  int seats_r = 0;
};

/// Max over the tree of the target party's summed expected seats.
PartisanOptimum optimize_partisan(const SampleTree& tree, const StateInstance& state, const LeafScores& scores,
                                  Party party);

struct FairOptimum {
  Plan plan;
  std::vector<NodeId> leaves;
  int seats_r = 0;
  double gap = 0.0;
};

/// Minimum |seats_r / N - y_r| over all plans in the tree using deterministic
/// seats; ties go to fewer R seats.
FairOptimum optimize_fair(const SampleTree& tree, const StateInstance& state, const LeafScores& scores, double y_r);

/// Deterministic R seats summed over a plan's districts under `rule`.
int plan_seats_r(const StateInstance& state, const Plan& plan, const SeatShareRule& rule);

struct MetricsRecord {
  int k = 0;
  std::string rule;
  std::string statistic;
  double seats_r = 0.0;
  double seat_share_r = 0.0;
  double gap = 0.0;
};

struct EnsembleResult {
  std::vector<std::vector<NodeId>> plans;  // leaf sets
  std::vector<int> seats_r;                // deterministic R seats per plan
  std::vector<MetricsRecord> records;      // min, q25, median, q75, max
};

EnsembleResult ensemble_metrics(const SampleTree& tree, const StateInstance& state, const SeatShareRule& rule,
                                std::size_t n_samples, std::uint64_t seed);

struct SweepOptions {
  UncertaintyModel uncertainty;
  BalanceTolerance tolerance;
  std::size_t ensemble_size = 1000;
  TreeOptions tree;
};

struct SweepFailure {
  int k = 0;
  std::string reason;
};

struct SweepResult {
  std::vector<MetricsRecord> records;  // max_R, max_D, min_gap, median per k
  std::vector<SweepFailure> failures;
  std::vector<Plan> witnesses_fair;    // one per successful k, in k order
};

SweepResult sweep_k(const StateInstance& state, const SeatShareRule& rule, std::span<const int> k_set,
                    std::uint64_t seed, const SweepOptions& options = {});

std::string metrics_csv(std::span<const MetricsRecord> records);

struct DiversityRecord {
  int k = 0;
  Party party = Party::R;
  double winner_score_stddev = 0.0;
  double coalition_score_stddev = 0.0;
  double coalition_geo_dispersion = 0.0;
  std::size_t plans = 0;  // plans in which the party won at least one seat
};

struct DiversityOptions {
  RankingMode mode = RankingMode::partisan_score;
  /// Candidates per party; 0 means seats + 2 in each district.
  int per_party = 0;
  unsigned threads = 1;
};

/// Simulates STV in every district of every plan and summarises intra-party
/// diversity per party, averaged over plans. A party that never wins a seat
/// has no record.
std::vector<DiversityRecord> intra_party_analysis(const StateInstance& state, std::span<const Plan> plans,
                                                  const VoterFile& voters, std::uint64_t seed,
                                                  const DiversityOptions& options = {});

std::string diversity_csv(std::span<const DiversityRecord> records);

/// Weighted population standard deviation; 0 for empty or zero-weight input.
double weighted_stddev(std::span<const double> values, std::span<const double> weights);

}  // namespace mmd
