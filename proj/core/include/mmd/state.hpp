#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmd {

using BlockId = std::int64_t;

/// Planar position in kilometers.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class Party : std::uint8_t { R, D };

inline std::string_view party_name(Party p) { return p == Party::R ? "R" : "D"; }
inline Party other(Party p) { return p == Party::R ? Party::D : Party::R; }

/// Raised for malformed or invariant-violating inputs; the message names the
/// offending record.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Block {
  BlockId id = 0;
  std::int64_t population = 0;
  double votes_r = 0.0;
  double votes_d = 0.0;
  Point centroid;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Block adjacency graph with populations and vote counts: the universe being
/// districted. Immutable after construction; all invariants are checked by the
/// constructor.
///
/// Internally blocks are addressed by dense indices [0, size()) in input order;
/// external ids are only used at the I/O boundary and in Plan.
class StateInstance {
 public:
  /// `neighbors[i]` lists the ids adjacent to `blocks[i]`. Throws InputError on
  /// duplicate ids, unknown or asymmetric neighbors, self loops, negative
  /// populations or votes, a disconnected graph, zero total population or
  /// total_seats < 1.
  StateInstance(std::vector<Block> blocks, const std::vector<std::vector<BlockId>>& neighbors,
                int total_seats);

  std::size_t size() const { return blocks_.size(); }
  int total_seats() const { return total_seats_; }
  std::int64_t total_population() const { return total_population_; }

  std::span<const Block> blocks() const { return blocks_; }
  const Block& block(std::size_t index) const { return blocks_[index]; }

  /// Neighbor indices of block `index`, ascending.
  std::span<const std::uint32_t> neighbors(std::size_t index) const {
    return {adjacency_.data() + offsets_[index], adjacency_.data() + offsets_[index + 1]};
  }

  bool contains(BlockId id) const { return index_.contains(id); }
  /// Throws InputError for unknown ids.
  std::size_t index_of(BlockId id) const;

  /// Statewide R share of the two-party vote (0.5 when there are no votes).
  double vote_share_r() const;

  friend bool operator==(const StateInstance& a, const StateInstance& b) {
    return a.total_seats_ == b.total_seats_ && a.blocks_ == b.blocks_ && a.offsets_ == b.offsets_ &&
           a.adjacency_ == b.adjacency_;
  }

 private:
  std::vector<Block> blocks_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> adjacency_;
  std::unordered_map<BlockId, std::size_t> index_;
  int total_seats_ = 0;
  std::int64_t total_population_ = 0;
};

/// Share of the two-party vote, with the degenerate zero-vote case scored 0.5.
inline double two_party_share(double votes_r, double votes_d) {
  const double total = votes_r + votes_d;
  return total > 0.0 ? votes_r / total : 0.5;
}

}  // namespace mmd
