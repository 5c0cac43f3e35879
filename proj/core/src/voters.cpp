#include "mmd/voters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "csv.hpp"
#include "mmd/io.hpp"
#include "mmd/rng.hpp"

namespace mmd {

namespace {

constexpr double kJitterKm = 0.5;

double party_sign(Party p) { return p == Party::R ? 1.0 : -1.0; }

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

RankingMode ranking_mode_from_name(std::string_view name) {
  if (name == "partisan_score" || name == "score") return RankingMode::partisan_score;
  if (name == "geographic" || name == "geo") return RankingMode::geographic;
  throw InputError("unknown ranking mode \"" + std::string(name) + "\" (expected partisan_score, geographic)");
}

std::string_view ranking_mode_name(RankingMode mode) {
  return mode == RankingMode::partisan_score ? "partisan_score" : "geographic";
}

VoterFile generate_voter_file(const StateInstance& state, const VoterModelParams& p) {
  if (p.voters_per_block < 1) throw InputError("voters_per_block must be >= 1");
  if (!(p.score_spread > 0.0)) throw InputError("score_spread must be positive");
  if (!(p.minor_fraction >= 0.0 && p.minor_fraction <= 1.0)) throw InputError("minor_fraction must lie in [0, 1]");

  const double mean_pop = static_cast<double>(state.total_population()) / static_cast<double>(state.size());
  const double statewide = state.vote_share_r();
  VoterFile out;
  VoterId next_id = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Block& b = state.block(i);
    Rng rng = make_rng(p.seed, {0x707e5, static_cast<std::uint64_t>(b.id)});
    const auto count = static_cast<std::int64_t>(
        std::llround(p.voters_per_block * static_cast<double>(b.population) / mean_pop));
    const double share = two_party_share(b.votes_r, b.votes_d);
    const auto n_r = std::llround(share * static_cast<double>(count));
    const double shift = p.lean_shift * (share - statewide);
    for (std::int64_t v = 0; v < count; ++v) {
      Voter voter;
      voter.id = next_id++;
      voter.block_id = b.id;
      voter.party = v < n_r ? Party::R : Party::D;
      const double sign = party_sign(voter.party);
      double score = sign + p.score_spread * standard_normal(rng) + shift;
      if (p.polarization > 0.0) {
        const bool minor = uniform01(rng) < p.minor_fraction;
        score += sign * (minor ? p.polarization : -p.polarization);
      }
      voter.partisan_score = score;
      const double radius = kJitterKm * std::sqrt(uniform01(rng));
      const double angle = 2.0 * 3.14159265358979323846 * uniform01(rng);
      voter.location = {b.centroid.x + radius * std::cos(angle), b.centroid.y + radius * std::sin(angle)};
      out.voters.push_back(voter);
    }
  }
  return out;
}

VoterIndex::VoterIndex(const StateInstance& state, const VoterFile& file) : offsets_(state.size() + 1, 0) {
  std::vector<std::size_t> block_of(file.voters.size());
  for (std::size_t v = 0; v < file.voters.size(); ++v) {
    block_of[v] = state.index_of(file.voters[v].block_id);
    ++offsets_[block_of[v] + 1];
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  voters_.resize(file.voters.size());
  auto cursor = offsets_;
  for (std::size_t v = 0; v < file.voters.size(); ++v) voters_[cursor[block_of[v]]++] = file.voters[v];
}

std::vector<Voter> VoterIndex::in_blocks(std::span<const std::uint32_t> block_indices) const {
  std::vector<Voter> out;
  for (auto i : block_indices) {
    auto s = in_block(i);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<Candidate> generate_candidates(std::span<const Voter> district_voters, int seats, int per_party,
                                           std::uint64_t seed) {
  if (per_party < seats) throw InputError("per_party (" + std::to_string(per_party) + ") < seats (" +
                                          std::to_string(seats) + ")");
  if (per_party < 1) throw InputError("per_party must be >= 1");

  Point centroid;
  for (const auto& v : district_voters) {
    centroid.x += v.location.x;
    centroid.y += v.location.y;
  }
  if (!district_voters.empty()) {
    centroid.x /= static_cast<double>(district_voters.size());
    centroid.y /= static_cast<double>(district_voters.size());
  }

  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(2 * per_party));
  for (Party party : {Party::R, Party::D}) {
    Rng rng = make_rng(seed, {0xca4d, static_cast<std::uint64_t>(party)});
    std::vector<double> scores;
    std::vector<Point> by_distance;
    for (const auto& v : district_voters) {
      if (v.party != party) continue;
      scores.push_back(v.partisan_score);
      by_distance.push_back(v.location);
    }
    std::sort(scores.begin(), scores.end());
    std::stable_sort(by_distance.begin(), by_distance.end(),
                     [&](Point a, Point b) { return distance(a, centroid) < distance(b, centroid); });

    std::vector<int> pairing(static_cast<std::size_t>(per_party));
    std::iota(pairing.begin(), pairing.end(), 0);
    for (std::size_t i = pairing.size(); i > 1; --i)
      std::swap(pairing[i - 1], pairing[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);

    const CandidateId base = party == Party::R ? 0 : per_party;
    for (int j = 0; j < per_party; ++j) {
      const double q = (j + 0.5) / per_party;
      Candidate c;
      c.id = base + j;
      c.party = party;
      if (scores.empty()) {
        c.score = party_sign(party);
        c.location = centroid;
      } else {
        c.score = interpolated_quantile(scores, q);
        const double lq = (pairing[static_cast<std::size_t>(j)] + 0.5) / per_party;
        const auto at = std::min(by_distance.size() - 1,
                                 static_cast<std::size_t>(lq * static_cast<double>(by_distance.size())));
        c.location = by_distance[at];
      }
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Candidate> generate_candidates(const District& district, const StateInstance& state, int per_party,
                                           const VoterFile& voters, std::uint64_t seed) {
  std::vector<char> member(state.size(), 0);
  for (auto id : district.blocks) member[state.index_of(id)] = 1;
  std::vector<Voter> inside;
  for (const auto& v : voters.voters) {
    if (member[state.index_of(v.block_id)]) inside.push_back(v);
  }
  return generate_candidates(inside, district.seats, per_party, seed);
}

std::vector<Ballot> build_ballots(std::span<const Voter> voters, std::span<const Candidate> candidates,
                                  RankingMode mode) {
  std::vector<Ballot> out;
  out.reserve(voters.size());
  std::vector<std::pair<double, CandidateId>> own, rest;
  for (const auto& v : voters) {
    own.clear();
    rest.clear();
    for (const auto& c : candidates) {
      const double d = mode == RankingMode::partisan_score ? std::abs(v.partisan_score - c.score)
                                                           : distance(v.location, c.location);
      (c.party == v.party ? own : rest).emplace_back(d, c.id);
    }
    std::sort(own.begin(), own.end());
    std::sort(rest.begin(), rest.end());
    Ballot b;
    b.voter_id = v.id;
    b.ranking.reserve(candidates.size());
    for (const auto& [d, id] : own) b.ranking.push_back(id);
    for (const auto& [d, id] : rest) b.ranking.push_back(id);
    out.push_back(std::move(b));
  }
  return out;
}

VoterFile parse_voter_csv(std::string_view text) {
  VoterFile file;
  std::size_t line_no = 0;
  for (auto line : detail::data_lines(text)) {
    const std::string where = "voter row " + std::to_string(++line_no);
    const auto cols = detail::split(line, ',');
    if (cols.size() != 6) throw InputError(where + ": expected voter_id,block_id,party,partisan_score,x,y");
    Voter v;
    v.id = detail::parse_number<VoterId>(cols[0], where);
    v.block_id = detail::parse_number<BlockId>(cols[1], where);
    v.party = detail::parse_party(cols[2], where);
    v.partisan_score = detail::parse_number<double>(cols[3], where);
    v.location = {detail::parse_number<double>(cols[4], where), detail::parse_number<double>(cols[5], where)};
    file.voters.push_back(v);
  }
  return file;
}

VoterFile load_voter_csv(const std::filesystem::path& path) { return parse_voter_csv(read_text_file(path)); }

std::string voter_csv(const VoterFile& file) {
  std::string out = "voter_id,block_id,party,partisan_score,x,y\n";
  for (const auto& v : file.voters)
    out += fmt::format("{},{},{},{},{},{}\n", v.id, v.block_id, party_name(v.party), v.partisan_score,
                       v.location.x, v.location.y);
  return out;
}

}  // namespace mmd
