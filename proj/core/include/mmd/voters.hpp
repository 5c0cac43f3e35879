#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmd/plan.hpp"
#include "mmd/state.hpp"
#include "mmd/stv.hpp"

namespace mmd {

struct Voter {
  VoterId id = 0;
  BlockId block_id = 0;
  Party party = Party::R;
  /// D-negative, R-positive.
  double partisan_score = 0.0;
  Point location;

  friend bool operator==(const Voter&, const Voter&) = default;
};

struct VoterFile {
  std::vector<Voter> voters;
  friend bool operator==(const VoterFile&, const VoterFile&) = default;
};

enum class RankingMode { partisan_score, geographic };

RankingMode ranking_mode_from_name(std::string_view name);
std::string_view ranking_mode_name(RankingMode mode);

/// Parameters of the synthetic voter model. Scores are drawn per party from
/// N(+1 or -1, score_spread^2), shifted by lean_shift * (block R share -
/// statewide R share). When polarization > 0 each party splits into two
/// sub-populations mixed across the state: a fraction `minor_fraction`
/// shifted by polarization toward the party's extreme, the rest shifted by
/// polarization toward the center.
struct VoterModelParams {
  int voters_per_block = 50;
  double score_spread = 0.5;
  double lean_shift = 0.5;
  double polarization = 0.0;
  double minor_fraction = 0.35;
  std::uint64_t seed = 0;
};

/// Each block gets round(voters_per_block * pop / mean pop) voters, of which
/// round(share * count) are R. Locations are uniform within 0.5 km of the
/// block centroid. Deterministic in params.seed.
VoterFile generate_voter_file(const StateInstance& state, const VoterModelParams& params);

/// Voters grouped by block index for fast district lookups.
class VoterIndex {
 public:
  VoterIndex(const StateInstance& state, const VoterFile& file);
  std::span<const Voter> in_block(std::size_t block_index) const {
    return {voters_.data() + offsets_[block_index], voters_.data() + offsets_[block_index + 1]};
  }
  std::vector<Voter> in_blocks(std::span<const std::uint32_t> block_indices) const;

 private:
  std::vector<Voter> voters_;
  std::vector<std::size_t> offsets_;
};

/// per_party candidates per party. Candidate j takes the (j + 0.5) / per_party
/// quantile of that party's district voter scores, and a location at a
/// quantile (randomly paired, seeded) of that party's voters ordered by
/// distance from the district voter centroid. R candidates get ids
/// [0, per_party), D candidates [per_party, 2 per_party).
/// Throws InputError if per_party < district.seats.
std::vector<Candidate> generate_candidates(const District& district, const StateInstance& state, int per_party,
                                           const VoterFile& voters, std::uint64_t seed);
std::vector<Candidate> generate_candidates(std::span<const Voter> district_voters, int seats, int per_party,
                                           std::uint64_t seed);

/// Own-party candidates first, then the other party's, each ascending by
/// distance (score gap or planar distance), ties by candidate id.
std::vector<Ballot> build_ballots(std::span<const Voter> voters, std::span<const Candidate> candidates,
                                  RankingMode mode);

/// Voter CSV: voter_id,block_id,party,partisan_score,x,y.
VoterFile parse_voter_csv(std::string_view text);
VoterFile load_voter_csv(const std::filesystem::path& path);
std::string voter_csv(const VoterFile& file);

}  // namespace mmd
