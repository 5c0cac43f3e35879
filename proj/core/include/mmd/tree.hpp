#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmd/plan.hpp"
#include "mmd/state.hpp"

namespace mmd {

using NodeId = std::uint32_t;

struct SampleCounts {
  int root_samples = 1;
  int internal_samples = 1;
  friend bool operator==(const SampleCounts&, const SampleCounts&) = default;
};

/// (max(1, round((1000/k)^1.2)), max(1, round((300/k)^0.5))).
SampleCounts sample_counts(int k);

/// A region of the state holding n_districts districts worth `seats` seats.
/// Each sample is one way to split the region into child nodes.
struct TreeNode {
  std::vector<std::uint32_t> region;  // ascending block indices
  int seats = 0;
  int n_districts = 0;
  int n_small = 0;
  int n_large = 0;
  int depth = 0;
  std::vector<std::vector<NodeId>> samples;

  bool is_leaf() const { return n_districts == 1; }
};

struct ChildSize {
  int n_small = 0;
  int n_large = 0;
  int districts() const { return n_small + n_large; }
  int seats(int small_size) const { return n_small * small_size + n_large * (small_size + 1); }
  friend bool operator==(const ChildSize&, const ChildSize&) = default;
};

struct TreeDiagnostics {
  std::size_t node_count = 0;
  std::size_t leaf_count = 0;
  std::size_t internal_count = 0;
  /// Samples abandoned at each depth after exhausting retries or losing a child subtree.
  std::vector<std::size_t> failures_per_depth;
  /// Split attempts (including retries) at each depth.
  std::vector<std::size_t> attempts_per_depth;
  /// Number of distinct plans encoded by the tree (sum over samples of the
  /// product of child counts); double because it grows exponentially.
  double implicit_plans = 0.0;
  std::string center_method = "k-means++ style hop-distance seeding; approximates SHP center selection";
};

struct TreeOptions {
  /// Override sample_counts(k) when set.
  std::optional<SampleCounts> counts;
  int max_retries = 20;
  unsigned threads = 1;
};

class SampleTree {
 public:
  SampleTree(std::vector<TreeNode> nodes, NodeId root, SizeAllocation allocation, BalanceTolerance tol,
             std::uint64_t seed, TreeDiagnostics diagnostics);

  NodeId root() const { return root_; }
  const TreeNode& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const TreeNode> nodes() const { return nodes_; }
  const SizeAllocation& allocation() const { return allocation_; }
  BalanceTolerance tolerance() const { return tol_; }
  std::uint64_t seed() const { return seed_; }
  const TreeDiagnostics& diagnostics() const { return diagnostics_; }
  int total_seats() const { return nodes_[root_].seats; }
  int districts() const { return nodes_[root_].n_districts; }

  /// Node ids of every leaf reachable from the root.
  std::vector<NodeId> leaves() const;

  /// Plan whose districts are the given leaf nodes, in order.
  Plan plan_from_leaves(const StateInstance& state, std::span<const NodeId> leaves) const;

  /// Restricted copy that keeps only the first `keep_root_samples` root samples.
  SampleTree with_root_samples(std::size_t keep_root_samples) const;

 private:
  std::vector<TreeNode> nodes_;
  NodeId root_ = 0;
  SizeAllocation allocation_;
  BalanceTolerance tol_;
  std::uint64_t seed_ = 0;
  TreeDiagnostics diagnostics_;
};

/// Raised when no feasible split exists (all samples failed).
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Distinct centers: the first drawn with probability proportional to
/// population, each next one proportional to population times the squared
/// hop distance to the nearest chosen center. Throws InputError if the region
/// has fewer than n_children blocks.
std::vector<std::uint32_t> select_centers(const StateInstance& state, std::span<const std::uint32_t> region,
                                          int n_children, std::uint64_t seed);

/// Child fanout drawn uniformly from {2..min(4, n_districts)}.
int draw_fanout(int n_districts, std::uint64_t seed);

/// District counts per child proportional to the population of each center's
/// hop-distance Voronoi cell (largest remainder, at least one each), then the
/// node's large districts dealt to children at random. Throws BuildError when
/// the node cannot give every child a district.
std::vector<ChildSize> assign_child_sizes(const StateInstance& state, const TreeNode& node,
                                          std::span<const std::uint32_t> centers, std::uint64_t seed);

/// Grows one region per center by capacity-weighted frontier accretion, then
/// repairs balance by contiguity-preserving boundary swaps. Returns the child
/// regions (ascending block indices) or nullopt if any child misses its
/// population target or is not contiguous.
std::optional<std::vector<std::vector<std::uint32_t>>> split_region(
    const StateInstance& state, const TreeNode& node, std::span<const std::uint32_t> centers,
    std::span<const ChildSize> child_sizes, int small_size, BalanceTolerance tol, std::uint64_t seed);

/// Builds the sample tree for k districts. Throws InputError unless
/// 1 <= k <= total seats and BuildError when every root sample fails.
SampleTree build_tree(const StateInstance& state, int k, BalanceTolerance tol, std::uint64_t seed,
                      const TreeOptions& options = {});

/// Independent top-down draws choosing one sample uniformly at every node.
std::vector<Plan> sample_plans(const SampleTree& tree, const StateInstance& state, std::size_t count,
                               std::uint64_t seed);
/// Same draws as sample_plans, returned as leaf lists.
std::vector<std::vector<NodeId>> sample_leaf_sets(const SampleTree& tree, std::size_t count, std::uint64_t seed);

std::string diagnostics_to_json(const TreeDiagnostics& diagnostics);

}  // namespace mmd
