#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "mmd/rng.hpp"
#include "mmd/state.hpp"
#include "mmd/stv.hpp"
#include "mmd/tree.hpp"

namespace mmd::test {

/// rows x cols 4-neighbour grid; block id r*cols+c with `pop` persons and
/// R share share(r, c) of 100 votes.
inline StateInstance grid_state(int rows, int cols, int seats, const std::function<double(int, int)>& share,
                                std::int64_t pop = 100) {
  std::vector<Block> blocks;
  std::vector<std::vector<BlockId>> nbrs;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double s = share(r, c);
      blocks.push_back({r * cols + c, pop, 100.0 * s, 100.0 * (1.0 - s), {2.0 * c, 2.0 * r}});
      std::vector<BlockId> n;
      if (r > 0) n.push_back((r - 1) * cols + c);
      if (r + 1 < rows) n.push_back((r + 1) * cols + c);
      if (c > 0) n.push_back(r * cols + c - 1);
      if (c + 1 < cols) n.push_back(r * cols + c + 1);
      nbrs.push_back(std::move(n));
    }
  }
  return StateInstance(std::move(blocks), nbrs, seats);
}

inline StateInstance uniform_grid(int rows, int cols, int seats, double share = 0.5) {
  return grid_state(rows, cols, seats, [share](int, int) { return share; });
}

struct Profile {
  std::vector<Candidate> candidates;
  std::vector<Ballot> ballots;
  int n_r = 0;
};

/// Party-line profile: m candidates per party (R ids 0..m-1, D ids m..2m-1),
/// n_r R voters out of v, own-party and other-party blocks each in a random
/// order per voter.
inline Profile party_line_profile(Rng& rng, int m, int v, int n_r) {
  Profile p;
  p.n_r = n_r;
  for (int i = 0; i < 2 * m; ++i) p.candidates.push_back({i, i < m ? Party::R : Party::D, 0.0, {}});
  std::vector<CandidateId> rs(m), ds(m);
  std::iota(rs.begin(), rs.end(), 0);
  std::iota(ds.begin(), ds.end(), m);
  auto shuffle = [&rng](std::vector<CandidateId>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i)
      std::swap(xs[i - 1], xs[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);
  };
  for (int voter = 0; voter < v; ++voter) {
    shuffle(rs);
    shuffle(ds);
    Ballot b;
    b.voter_id = voter;
    const bool is_r = voter < n_r;
    const auto& own = is_r ? rs : ds;
    const auto& rest = is_r ? ds : rs;
    b.ranking.insert(b.ranking.end(), own.begin(), own.end());
    b.ranking.insert(b.ranking.end(), rest.begin(), rest.end());
    p.ballots.push_back(std::move(b));
  }
  return p;
}

/// Every plan encoded by the subtree at `id`, as leaf lists. Independent of
/// the DP code: plain recursive cartesian products.
inline std::vector<std::vector<NodeId>> enumerate_plans(const SampleTree& tree, NodeId id) {
  const auto& node = tree.node(id);
  if (node.is_leaf()) return {{id}};
  std::vector<std::vector<NodeId>> out;
  for (const auto& sample : node.samples) {
    std::vector<std::vector<NodeId>> acc{{}};
    for (auto child : sample) {
      const auto sub = enumerate_plans(tree, child);
      std::vector<std::vector<NodeId>> next;
      for (const auto& a : acc)
        for (const auto& s : sub) {
          auto joined = a;
          joined.insert(joined.end(), s.begin(), s.end());
          next.push_back(std::move(joined));
        }
      acc = std::move(next);
    }
    out.insert(out.end(), acc.begin(), acc.end());
  }
  return out;
}

}  // namespace mmd::test
