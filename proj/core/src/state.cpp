#include "mmd/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmd {

StateInstance::StateInstance(std::vector<Block> blocks, const std::vector<std::vector<BlockId>>& neighbors,
                             int total_seats)
    : blocks_(std::move(blocks)), total_seats_(total_seats) {
  if (total_seats_ < 1) throw InputError("total_seats must be >= 1, got " + std::to_string(total_seats_));
  if (blocks_.empty()) throw InputError("state has no blocks");
  if (neighbors.size() != blocks_.size()) throw InputError("neighbor list count does not match block count");

  index_.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (!index_.emplace(b.id, i).second) throw InputError("duplicate block id " + std::to_string(b.id));
    if (b.population < 0) throw InputError("block " + std::to_string(b.id) + ": negative population");
    if (!(b.votes_r >= 0.0) || !(b.votes_d >= 0.0) || !std::isfinite(b.votes_r) || !std::isfinite(b.votes_d))
      throw InputError("block " + std::to_string(b.id) + ": votes must be finite and nonnegative");
    total_population_ += b.population;
  }
  if (total_population_ <= 0) throw InputError("total population must be positive");

  offsets_.assign(blocks_.size() + 1, 0);
  std::vector<std::vector<std::uint32_t>> adj(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (BlockId nid : neighbors[i]) {
      auto it = index_.find(nid);
      if (it == index_.end())
        throw InputError("block " + std::to_string(blocks_[i].id) + ": unknown neighbor " + std::to_string(nid));
      if (it->second == i) throw InputError("block " + std::to_string(blocks_[i].id) + ": lists itself as neighbor");
      adj[i].push_back(static_cast<std::uint32_t>(it->second));
    }
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
  }
  for (std::size_t i = 0; i < adj.size(); ++i) {
    for (auto j : adj[i]) {
      if (!std::binary_search(adj[j].begin(), adj[j].end(), static_cast<std::uint32_t>(i)))
        throw InputError("asymmetric adjacency: " + std::to_string(blocks_[i].id) + " -> " +
                         std::to_string(blocks_[j].id) + " has no reverse edge");
    }
  }
  for (std::size_t i = 0; i < adj.size(); ++i) {
    offsets_[i + 1] = offsets_[i] + static_cast<std::uint32_t>(adj[i].size());
    adjacency_.insert(adjacency_.end(), adj[i].begin(), adj[i].end());
  }

  std::vector<char> seen(blocks_.size(), 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : this->neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != blocks_.size()) {
    const auto first_missing = std::find(seen.begin(), seen.end(), 0) - seen.begin();
    throw InputError("graph is disconnected: block " + std::to_string(blocks_[first_missing].id) +
                     " is unreachable from block " + std::to_string(blocks_[0].id));
  }
}

std::size_t StateInstance::index_of(BlockId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown block id " + std::to_string(id));
  return it->second;
}

double StateInstance::vote_share_r() const {
  double r = 0.0, d = 0.0;
  for (const auto& b : blocks_) {
    r += b.votes_r;
    d += b.votes_d;
  }
  return two_party_share(r, d);
}

}  // namespace mmd
