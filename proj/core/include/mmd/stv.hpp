#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmd/social_choice.hpp"
#include "mmd/state.hpp"

namespace mmd {

using CandidateId = int;
using VoterId = std::int64_t;

struct Candidate {
  CandidateId id = 0;
  Party party = Party::R;
  double score = 0.0;
  Point location;
};

struct Ballot {
  VoterId voter_id = 0;
  std::vector<CandidateId> ranking;
  double weight = 1.0;
};

struct CandidateTally {
  CandidateId candidate;
  double votes;
};

/// One counting round: tallies before any action, then what happened.
struct RoundRecord {
  int round = 0;
  std::vector<CandidateTally> tallies;
  std::vector<CandidateId> elected;
  std::optional<CandidateId> eliminated;
  /// Fraction of each supporting ballot that continues past each new winner.
  std::vector<CandidateTally> transfer_factors;
  /// Candidates at or above quota this round (may exceed the open seats).
  std::vector<CandidateId> quota_reachers;
  bool filled_by_remaining = false;
  // Weight ledger after the round's actions.
  double continuing_weight = 0.0;
  double retained_weight = 0.0;
  double exhausted_weight = 0.0;
};

struct CoalitionMember {
  VoterId voter_id;
  double weight;
};

/// Voters who backed a winner in the round it was elected, with the ballot
/// weight each contributed at that moment.
struct Coalition {
  CandidateId candidate = 0;
  double votes = 0.0;
  bool by_quota = true;
  std::vector<CoalitionMember> members;
};

struct ElectionResult {
  std::vector<CandidateId> winners;
  std::vector<RoundRecord> rounds;
  std::vector<Coalition> coalitions;  // parallel to winners
  std::int64_t quota = 0;
  double total_weight = 0.0;
  /// Distinct candidates whose tally ever reached the quota.
  int quota_reachers = 0;

  friend bool operator==(const ElectionResult&, const ElectionResult&);
};

/// floor(v / (m + 1)) + 1.
std::int64_t droop_quota(std::int64_t voters, int seats);

/// Fractional (Scottish) STV. Every quota-reacher is elected in the same
/// round; each keeps (Q - 1) / total of its supporters' weight and passes the
/// rest to their next continuing preference. Without a quota-reacher the
/// lowest candidate is eliminated, R before D on ties and uniformly at random
/// within a party. Counting stops once all seats are filled or the continuing
/// candidates exactly fill the open seats.
///
/// Throws InputError when seats is outside [1, |candidates|], candidate ids
/// repeat, or a ballot ranks an unknown or repeated candidate or has a weight
/// outside (0, 1].
ElectionResult run_stv(std::span<const Ballot> ballots, std::span<const Candidate> candidates, int seats,
                       std::uint64_t seed);

/// Winners per party; throws InputError for an empty winner list or a winner
/// missing from `candidates`.
SeatOutcome partisan_split(const ElectionResult& result, std::span<const Candidate> candidates);

/// One JSON object per round.
std::string round_log_jsonl(const ElectionResult& result);
std::string election_to_json(const ElectionResult& result, std::span<const Candidate> candidates);

/// Ballot CSV: voter_id,weight,ranking with the ranking as ';'-separated ids.
std::vector<Ballot> parse_ballots_csv(std::string_view text);
std::vector<Ballot> load_ballots_csv(const std::filesystem::path& path);
std::string ballots_to_csv(std::span<const Ballot> ballots);

/// Candidate CSV: id,party,score,x,y.
std::vector<Candidate> parse_candidates_csv(std::string_view text);
std::string candidates_to_csv(std::span<const Candidate> candidates);

}  // namespace mmd
