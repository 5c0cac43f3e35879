#include "mmd/stv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "csv.hpp"
#include "mmd/io.hpp"
#include "mmd/rng.hpp"

namespace mmd {

namespace {

enum class Status : std::uint8_t { continuing, elected, eliminated };

constexpr double kVoteTolerance = 1e-9;

struct Count {
  const std::vector<Candidate>& candidates;
  std::vector<std::vector<std::uint32_t>> rankings;  // candidate indices per ballot
  std::vector<double> weight;
  std::vector<std::uint32_t> pos;
  std::vector<char> active;
  std::vector<Status> status;
  std::vector<VoterId> voter;
};

// Random order within each party; used to break exact ties.
void shuffle_within_ties(std::vector<std::uint32_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

bool equal_votes(double a, double b) { return std::abs(a - b) <= kVoteTolerance * std::max(1.0, std::abs(a)); }

}  // namespace

std::int64_t droop_quota(std::int64_t voters, int seats) { return voters / (seats + 1) + 1; }

bool operator==(const ElectionResult& a, const ElectionResult& b) {
  if (a.winners != b.winners || a.quota != b.quota || a.quota_reachers != b.quota_reachers ||
      a.rounds.size() != b.rounds.size() || a.coalitions.size() != b.coalitions.size() ||
      a.total_weight != b.total_weight)
    return false;
  for (std::size_t r = 0; r < a.rounds.size(); ++r) {
    const auto& x = a.rounds[r];
    const auto& y = b.rounds[r];
    if (x.elected != y.elected || x.eliminated != y.eliminated || x.quota_reachers != y.quota_reachers ||
        x.tallies.size() != y.tallies.size() || x.continuing_weight != y.continuing_weight ||
        x.retained_weight != y.retained_weight || x.exhausted_weight != y.exhausted_weight)
      return false;
    for (std::size_t i = 0; i < x.tallies.size(); ++i)
      if (x.tallies[i].candidate != y.tallies[i].candidate || x.tallies[i].votes != y.tallies[i].votes) return false;
  }
  for (std::size_t c = 0; c < a.coalitions.size(); ++c) {
    const auto& x = a.coalitions[c];
    const auto& y = b.coalitions[c];
    if (x.candidate != y.candidate || x.votes != y.votes || x.members.size() != y.members.size()) return false;
    for (std::size_t i = 0; i < x.members.size(); ++i)
      if (x.members[i].voter_id != y.members[i].voter_id || x.members[i].weight != y.members[i].weight) return false;
  }
  return true;
}

ElectionResult run_stv(std::span<const Ballot> ballots, std::span<const Candidate> candidates, int seats,
                       std::uint64_t seed) {
  if (seats < 1) throw InputError("seats must be >= 1");
  if (static_cast<std::size_t>(seats) > candidates.size())
    throw InputError("seats (" + std::to_string(seats) + ") exceed candidates (" +
                     std::to_string(candidates.size()) + ")");

  std::vector<Candidate> cands(candidates.begin(), candidates.end());
  std::unordered_map<CandidateId, std::uint32_t> cindex;
  for (std::uint32_t i = 0; i < cands.size(); ++i) {
    if (!cindex.emplace(cands[i].id, i).second)
      throw InputError("duplicate candidate id " + std::to_string(cands[i].id));
  }

  Count st{cands, {}, {}, {}, {}, std::vector<Status>(cands.size(), Status::continuing), {}};
  st.rankings.reserve(ballots.size());
  double total_weight = 0.0;
  std::vector<char> seen(cands.size(), 0);
  for (const auto& b : ballots) {
    if (!(b.weight > 0.0 && b.weight <= 1.0))
      throw InputError("ballot of voter " + std::to_string(b.voter_id) + ": weight must lie in (0, 1]");
    std::vector<std::uint32_t> r;
    r.reserve(b.ranking.size());
    for (auto cid : b.ranking) {
      auto it = cindex.find(cid);
      if (it == cindex.end())
        throw InputError("ballot of voter " + std::to_string(b.voter_id) + ": unknown candidate " +
                         std::to_string(cid));
      if (seen[it->second])
        throw InputError("ballot of voter " + std::to_string(b.voter_id) + ": candidate " + std::to_string(cid) +
                         " ranked twice");
      seen[it->second] = 1;
      r.push_back(it->second);
    }
    for (auto c : r) seen[c] = 0;
    st.rankings.push_back(std::move(r));
    st.weight.push_back(b.weight);
    st.voter.push_back(b.voter_id);
    total_weight += b.weight;
  }
  st.pos.assign(ballots.size(), 0);
  st.active.assign(ballots.size(), 1);

  ElectionResult result;
  result.total_weight = total_weight;
  const auto voters = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(total_weight + 1e-9)));
  result.quota = droop_quota(voters, seats);
  const double quota = static_cast<double>(result.quota);
  const double keep = quota - 1.0;

  Rng rng{seed};
  double retained = 0.0;
  double exhausted = 0.0;
  std::vector<char> reached(cands.size(), 0);
  std::vector<double> tally(cands.size());
  std::vector<std::vector<std::uint32_t>> supporters(cands.size());

  auto elect = [&](std::uint32_t c, bool by_quota) {
    Coalition coalition;
    coalition.candidate = cands[c].id;
    coalition.votes = tally[c];
    coalition.by_quota = by_quota;
    coalition.members.reserve(supporters[c].size());
    for (auto b : supporters[c]) coalition.members.push_back({st.voter[b], st.weight[b]});
    result.coalitions.push_back(std::move(coalition));
    result.winners.push_back(cands[c].id);
    st.status[c] = Status::elected;
  };

  auto ledger = [&](RoundRecord& rec) {
    double continuing = 0.0;
    for (std::size_t b = 0; b < st.weight.size(); ++b)
      if (st.active[b]) continuing += st.weight[b];
    rec.continuing_weight = continuing;
    rec.retained_weight = retained;
    rec.exhausted_weight = exhausted;
  };

  int round = 0;
  while (static_cast<int>(result.winners.size()) < seats) {
    RoundRecord rec;
    rec.round = ++round;

    std::fill(tally.begin(), tally.end(), 0.0);
    for (auto& s : supporters) s.clear();
    for (std::size_t b = 0; b < st.rankings.size(); ++b) {
      if (!st.active[b]) continue;
      const auto& r = st.rankings[b];
      while (st.pos[b] < r.size() && st.status[r[st.pos[b]]] != Status::continuing) ++st.pos[b];
      if (st.pos[b] == r.size()) {
        st.active[b] = 0;
        exhausted += st.weight[b];
        continue;
      }
      const auto c = r[st.pos[b]];
      tally[c] += st.weight[b];
      supporters[c].push_back(static_cast<std::uint32_t>(b));
    }

    std::vector<std::uint32_t> continuing;
    for (std::uint32_t c = 0; c < cands.size(); ++c) {
      if (st.status[c] != Status::continuing) continue;
      continuing.push_back(c);
      rec.tallies.push_back({cands[c].id, tally[c]});
    }
    const int open = seats - static_cast<int>(result.winners.size());

    if (static_cast<int>(continuing.size()) <= open) {
      // Remaining candidates fill the remaining seats, highest tally first.
      std::stable_sort(continuing.begin(), continuing.end(), [&](auto a, auto b) {
        if (!equal_votes(tally[a], tally[b])) return tally[a] > tally[b];
        return cands[a].party == Party::D && cands[b].party == Party::R;
      });
      for (auto c : continuing) {
        if (tally[c] >= quota - kVoteTolerance && !reached[c]) {
          reached[c] = 1;
          rec.quota_reachers.push_back(cands[c].id);
        }
        elect(c, false);
        rec.elected.push_back(cands[c].id);
        for (auto b : supporters[c]) {
          retained += st.weight[b];
          st.weight[b] = 0.0;
          st.active[b] = 0;
        }
      }
      rec.filled_by_remaining = true;
      ledger(rec);
      result.rounds.push_back(std::move(rec));
      break;
    }

    std::vector<std::uint32_t> reachers;
    for (auto c : continuing)
      if (tally[c] >= quota - kVoteTolerance) reachers.push_back(c);

    if (!reachers.empty()) {
      for (auto c : reachers) {
        rec.quota_reachers.push_back(cands[c].id);
        reached[c] = 1;
      }
      if (static_cast<int>(reachers.size()) > open) {
        // More reachers than seats: highest tallies win, D ahead of R on exact
        // ties, random within a party.
        shuffle_within_ties(reachers, rng);
        std::stable_sort(reachers.begin(), reachers.end(), [&](auto a, auto b) {
          if (!equal_votes(tally[a], tally[b])) return tally[a] > tally[b];
          return cands[a].party == Party::D && cands[b].party == Party::R;
        });
        reachers.resize(static_cast<std::size_t>(open));
      }
      for (auto c : reachers) {
        const double total = tally[c];
        const double factor = (total - keep) / total;
        elect(c, true);
        rec.elected.push_back(cands[c].id);
        rec.transfer_factors.push_back({cands[c].id, factor});
        for (auto b : supporters[c]) {
          retained += st.weight[b] * (1.0 - factor);
          st.weight[b] *= factor;
        }
      }
    } else {
      double low = tally[continuing.front()];
      for (auto c : continuing) low = std::min(low, tally[c]);
      std::vector<std::uint32_t> lowest_r, lowest_d;
      for (auto c : continuing) {
        if (!equal_votes(tally[c], low)) continue;
        (cands[c].party == Party::R ? lowest_r : lowest_d).push_back(c);
      }
      const auto& pool = lowest_r.empty() ? lowest_d : lowest_r;
      const auto pick = pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1))];
      st.status[pick] = Status::eliminated;
      rec.eliminated = cands[pick].id;
    }
    ledger(rec);
    result.rounds.push_back(std::move(rec));
  }

  result.quota_reachers = static_cast<int>(std::count(reached.begin(), reached.end(), 1));
  return result;
}

SeatOutcome partisan_split(const ElectionResult& result, std::span<const Candidate> candidates) {
  if (result.winners.empty()) throw InputError("election has no winners");
  SeatOutcome out;
  for (auto w : result.winners) {
    auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.id == w; });
    if (it == candidates.end()) throw InputError("winner " + std::to_string(w) + " is not a listed candidate");
    (it->party == Party::R ? out.seats_r : out.seats_d) += 1;
  }
  return out;
}

namespace {

nlohmann::json tallies_json(const std::vector<CandidateTally>& t) {
  auto arr = nlohmann::json::array();
  for (const auto& x : t) arr.push_back({{"candidate", x.candidate}, {"votes", x.votes}});
  return arr;
}

nlohmann::json round_json(const RoundRecord& r) {
  nlohmann::json j = {{"round", r.round},
                      {"tallies", tallies_json(r.tallies)},
                      {"elected", r.elected},
                      {"quota_reachers", r.quota_reachers},
                      {"transfer_factors", tallies_json(r.transfer_factors)},
                      {"filled_by_remaining", r.filled_by_remaining},
                      {"continuing_weight", r.continuing_weight},
                      {"retained_weight", r.retained_weight},
                      {"exhausted_weight", r.exhausted_weight}};
  j["eliminated"] = r.eliminated ? nlohmann::json(*r.eliminated) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string round_log_jsonl(const ElectionResult& result) {
  std::string out;
  for (const auto& r : result.rounds) out += round_json(r).dump() + "\n";
  return out;
}

std::string election_to_json(const ElectionResult& result, std::span<const Candidate> candidates) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates)
    cands.push_back({{"id", c.id},
                     {"party", party_name(c.party)},
                     {"score", c.score},
                     {"x", c.location.x},
                     {"y", c.location.y}});
  nlohmann::json coalitions = nlohmann::json::array();
  for (const auto& c : result.coalitions) {
    double sum = 0.0;
    for (const auto& m : c.members) sum += m.weight;
    coalitions.push_back(
        {{"candidate", c.candidate}, {"votes", c.votes}, {"by_quota", c.by_quota}, {"supporters", c.members.size()},
         {"weight", sum}});
  }
  const auto split = partisan_split(result, candidates);
  nlohmann::json j = {{"quota", result.quota},
                      {"total_weight", result.total_weight},
                      {"winners", result.winners},
                      {"seats_r", split.seats_r},
                      {"seats_d", split.seats_d},
                      {"rounds", result.rounds.size()},
                      {"quota_reachers", result.quota_reachers},
                      {"candidates", std::move(cands)},
                      {"coalitions", std::move(coalitions)}};
  return j.dump(1) + "\n";
}

std::vector<Ballot> parse_ballots_csv(std::string_view text) {
  std::vector<Ballot> out;
  std::size_t line_no = 0;
  for (auto line : detail::data_lines(text)) {
    const std::string where = "ballot row " + std::to_string(++line_no);
    const auto cols = detail::split(line, ',');
    if (cols.size() != 3) throw InputError(where + ": expected voter_id,weight,ranking");
    Ballot b;
    b.voter_id = detail::parse_number<VoterId>(cols[0], where);
    b.weight = detail::parse_number<double>(cols[1], where);
    const auto ranking = detail::trim(cols[2]);
    if (!ranking.empty())
      for (auto id : detail::split(ranking, ';')) b.ranking.push_back(detail::parse_number<CandidateId>(id, where));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Ballot> load_ballots_csv(const std::filesystem::path& path) {
  return parse_ballots_csv(read_text_file(path));
}

std::string ballots_to_csv(std::span<const Ballot> ballots) {
  std::string out = "voter_id,weight,ranking\n";
  for (const auto& b : ballots) {
    out += fmt::format("{},{},", b.voter_id, b.weight);
    for (std::size_t i = 0; i < b.ranking.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(b.ranking[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<Candidate> parse_candidates_csv(std::string_view text) {
  std::vector<Candidate> out;
  std::size_t line_no = 0;
  for (auto line : detail::data_lines(text)) {
    const std::string where = "candidate row " + std::to_string(++line_no);
    const auto cols = detail::split(line, ',');
    if (cols.size() != 5) throw InputError(where + ": expected id,party,score,x,y");
    Candidate c;
    c.id = detail::parse_number<CandidateId>(cols[0], where);
    c.party = detail::parse_party(cols[1], where);
    c.score = detail::parse_number<double>(cols[2], where);
    c.location = {detail::parse_number<double>(cols[3], where), detail::parse_number<double>(cols[4], where)};
    out.push_back(c);
  }
  return out;
}

std::string candidates_to_csv(std::span<const Candidate> candidates) {
  std::string out = "id,party,score,x,y\n";
  for (const auto& c : candidates)
    out += fmt::format("{},{},{},{},{}\n", c.id, party_name(c.party), c.score, c.location.x, c.location.y);
  return out;
}

}  // namespace mmd
