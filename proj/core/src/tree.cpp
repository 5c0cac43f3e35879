#include "mmd/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include <json.hpp>

#include "mmd/parallel.hpp"
#include "mmd/rng.hpp"

namespace mmd {

namespace {

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

// Induced subgraph of a region with dense local ids.
struct RegionGraph {
  std::vector<std::uint32_t> global;  // local -> global block index
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> adjacency;
  std::vector<std::int64_t> population;
  std::int64_t total_population = 0;

  RegionGraph(const StateInstance& state, std::span<const std::uint32_t> region)
      : global(region.begin(), region.end()) {
    std::vector<std::uint32_t> local(state.size(), kUnreached);
    for (std::uint32_t i = 0; i < global.size(); ++i) local[global[i]] = i;
    offsets.reserve(global.size() + 1);
    offsets.push_back(0);
    population.reserve(global.size());
    for (auto g : global) {
      for (auto w : state.neighbors(g))
        if (local[w] != kUnreached) adjacency.push_back(local[w]);
      offsets.push_back(static_cast<std::uint32_t>(adjacency.size()));
      population.push_back(state.block(g).population);
      total_population += state.block(g).population;
    }
  }

  std::size_t size() const { return global.size(); }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {adjacency.data() + offsets[v], adjacency.data() + offsets[v + 1]};
  }

  std::uint32_t local_of(std::uint32_t global_index) const {
    auto it = std::lower_bound(global.begin(), global.end(), global_index);
    if (it == global.end() || *it != global_index) throw InputError("center outside region");
    return static_cast<std::uint32_t>(it - global.begin());
  }

  // Hop distances from `sources`; with `owner`, each vertex also records which
  // source reached it first (sources are expanded in order, so ties go to the
  // lower source index).
  std::vector<std::uint32_t> bfs(std::span<const std::uint32_t> sources, std::vector<std::uint32_t>* owner) const {
    std::vector<std::uint32_t> dist(size(), kUnreached);
    if (owner) owner->assign(size(), kUnreached);
    std::vector<std::uint32_t> queue;
    queue.reserve(size());
    for (std::uint32_t s = 0; s < sources.size(); ++s) {
      if (dist[sources[s]] != kUnreached) continue;
      dist[sources[s]] = 0;
      if (owner) (*owner)[sources[s]] = s;
      queue.push_back(sources[s]);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto v = queue[head];
      for (auto w : neighbors(v)) {
        if (dist[w] == kUnreached) {
          dist[w] = dist[v] + 1;
          if (owner) (*owner)[w] = (*owner)[v];
          queue.push_back(w);
        }
      }
    }
    return dist;
  }
};

std::uint32_t weighted_pick(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double r = uniform01(rng) * total;
  std::uint32_t last_positive = 0;
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    if (r < weights[i]) return i;
    r -= weights[i];
  }
  return last_positive;
}

std::vector<std::uint32_t> select_local_centers(const RegionGraph& g, int n_children, Rng& rng) {
  if (n_children < 1 || static_cast<std::size_t>(n_children) > g.size())
    throw InputError("region of " + std::to_string(g.size()) + " blocks cannot host " + std::to_string(n_children) +
                     " centers");
  std::vector<std::uint32_t> centers;
  std::vector<char> chosen(g.size(), 0);
  std::vector<double> weights(g.size());
  std::vector<std::uint32_t> nearest(g.size(), kUnreached);

  auto pick = [&](const std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total > 0.0) return weighted_pick(w, rng);
    // Degenerate weights: uniform over the unchosen blocks.
    std::vector<std::uint32_t> open;
    for (std::uint32_t i = 0; i < g.size(); ++i)
      if (!chosen[i]) open.push_back(i);
    return open[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(open.size()) - 1))];
  };

  for (std::uint32_t i = 0; i < g.size(); ++i) weights[i] = static_cast<double>(g.population[i]);
  for (int c = 0; c < n_children; ++c) {
    const auto next = pick(weights);
    centers.push_back(next);
    chosen[next] = 1;
    const std::uint32_t src[] = {next};
    const auto dist = g.bfs(src, nullptr);
    for (std::uint32_t i = 0; i < g.size(); ++i) {
      nearest[i] = std::min(nearest[i], dist[i]);
      const double d = nearest[i] == kUnreached ? 0.0 : static_cast<double>(nearest[i]);
      weights[i] = chosen[i] ? 0.0 : static_cast<double>(g.population[i]) * d * d;
    }
  }
  return centers;
}

std::vector<ChildSize> local_child_sizes(const RegionGraph& g, const TreeNode& node,
                                         std::span<const std::uint32_t> centers, Rng& rng) {
  const int fanout = static_cast<int>(centers.size());
  const int n = node.n_districts;
  if (fanout < 1 || fanout > n)
    throw BuildError("cannot give " + std::to_string(fanout) + " children at least one of " + std::to_string(n) +
                     " districts");

  std::vector<std::uint32_t> owner;
  g.bfs(centers, &owner);
  std::vector<double> cell(static_cast<std::size_t>(fanout), 0.0);
  for (std::uint32_t v = 0; v < g.size(); ++v)
    if (owner[v] != kUnreached) cell[owner[v]] += static_cast<double>(g.population[v]);
  double total = std::accumulate(cell.begin(), cell.end(), 0.0);
  if (total <= 0.0) {
    std::fill(cell.begin(), cell.end(), 1.0);
    total = fanout;
  }

  std::vector<double> quota(cell.size());
  std::vector<int> count(cell.size());
  for (std::size_t c = 0; c < cell.size(); ++c) {
    quota[c] = n * cell[c] / total;
    count[c] = std::max(1, static_cast<int>(std::floor(quota[c])));
  }
  int assigned = std::accumulate(count.begin(), count.end(), 0);
  while (assigned > n) {
    std::size_t best = cell.size();
    for (std::size_t c = 0; c < cell.size(); ++c) {
      if (count[c] <= 1) continue;
      if (best == cell.size() || quota[c] - count[c] < quota[best] - count[best]) best = c;
    }
    if (best == cell.size()) throw BuildError("infeasible child split");
    --count[best];
    --assigned;
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cell.size(); ++c)
      if (quota[c] - count[c] > quota[best] - count[best]) best = c;
    ++count[best];
    ++assigned;
  }

  // Deal the node's large districts over its district slots at random.
  std::vector<char> large(static_cast<std::size_t>(n), 0);
  std::fill(large.begin(), large.begin() + node.n_large, 1);
  for (std::size_t i = large.size(); i > 1; --i)
    std::swap(large[i - 1], large[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1))]);

  std::vector<ChildSize> out(cell.size());
  std::size_t slot = 0;
  for (std::size_t c = 0; c < cell.size(); ++c) {
    for (int k = 0; k < count[c]; ++k, ++slot) (large[slot] ? out[c].n_large : out[c].n_small) += 1;
  }
  return out;
}

// Articulation points of the subgraph induced by vertices with owner == part.
void articulation_points(const RegionGraph& g, const std::vector<int>& owner, int part,
                         std::span<const std::uint32_t> members, std::vector<char>& is_cut) {
  static thread_local std::vector<std::uint32_t> disc, low, parent, edge_pos;
  disc.assign(g.size(), kUnreached);
  low.assign(g.size(), 0);
  parent.assign(g.size(), kUnreached);
  edge_pos.assign(g.size(), 0);
  for (auto v : members) is_cut[v] = 0;
  if (members.empty()) return;

  std::uint32_t timer = 0;
  const auto root = members.front();
  std::vector<std::uint32_t> stack{root};
  disc[root] = low[root] = timer++;
  int root_children = 0;
  while (!stack.empty()) {
    const auto v = stack.back();
    auto nbrs = g.neighbors(v);
    if (edge_pos[v] < nbrs.size()) {
      const auto w = nbrs[edge_pos[v]++];
      if (owner[w] != part) continue;
      if (disc[w] == kUnreached) {
        parent[w] = v;
        disc[w] = low[w] = timer++;
        if (v == root) ++root_children;
        stack.push_back(w);
      } else if (w != parent[v]) {
        low[v] = std::min(low[v], disc[w]);
      }
    } else {
      stack.pop_back();
      const auto p = parent[v];
      if (p != kUnreached) {
        low[p] = std::min(low[p], low[v]);
        if (p != root && low[v] >= disc[p]) is_cut[p] = 1;
      }
    }
  }
  if (root_children > 1) is_cut[root] = 1;
}

struct SplitPlanResult {
  bool ok = false;
  std::vector<std::vector<std::uint32_t>> regions;
};

SplitPlanResult local_split(const StateInstance& state, const RegionGraph& g, const TreeNode& node,
                            std::span<const std::uint32_t> centers, std::span<const ChildSize> sizes, int small_size,
                            BalanceTolerance tol, Rng& rng) {
  const std::size_t f = centers.size();
  SplitPlanResult result;
  if (f != sizes.size() || f == 0) return result;

  std::vector<int> seats(f);
  int seat_sum = 0;
  for (std::size_t c = 0; c < f; ++c) {
    seats[c] = sizes[c].seats(small_size);
    seat_sum += seats[c];
  }
  if (seat_sum != node.seats) return result;

  std::vector<double> target(f);
  for (std::size_t c = 0; c < f; ++c)
    target[c] = static_cast<double>(g.total_population) * seats[c] / static_cast<double>(node.seats);

  // Random tie keys make growth order seed dependent.
  std::vector<double> key(g.size());
  for (auto& k : key) k = uniform01(rng);

  std::vector<std::vector<std::uint32_t>> dist(f);
  for (std::size_t c = 0; c < f; ++c) {
    const std::uint32_t src[] = {centers[c]};
    dist[c] = g.bfs(src, nullptr);
  }

  using Entry = std::tuple<std::uint32_t, double, std::uint32_t>;  // hop distance, tie key, vertex
  std::vector<std::priority_queue<Entry, std::vector<Entry>, std::greater<>>> frontier(f);
  std::vector<int> owner(g.size(), -1);
  std::vector<double> pop(f, 0.0);
  std::size_t unassigned = g.size();

  auto claim = [&](std::size_t c, std::uint32_t v) {
    owner[v] = static_cast<int>(c);
    pop[c] += static_cast<double>(g.population[v]);
    --unassigned;
    for (auto w : g.neighbors(v))
      if (owner[w] == -1) frontier[c].emplace(dist[c][w], key[w], w);
  };
  for (std::size_t c = 0; c < f; ++c) {
    if (owner[centers[c]] != -1) return result;
    claim(c, centers[c]);
  }

  auto clean = [&](std::size_t c) {
    while (!frontier[c].empty() && owner[std::get<2>(frontier[c].top())] != -1) frontier[c].pop();
    return !frontier[c].empty();
  };

  while (unassigned > 0) {
    // Most remaining relative capacity first; once every open child is full,
    // the least overfull child absorbs the rest.
    std::size_t pick = f;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < f; ++c) {
      if (!clean(c)) continue;
      const double room = (target[c] - pop[c]) / std::max(target[c], 1.0);
      if (room > best) {
        best = room;
        pick = c;
      }
    }
    if (pick == f) return result;  // region is disconnected
    const auto v = std::get<2>(frontier[pick].top());
    frontier[pick].pop();
    claim(pick, v);
  }

  const auto total_pop = state.total_population();
  const int total_seats = state.total_seats();
  auto balanced = [&](std::size_t c) {
    return within_balance(static_cast<std::int64_t>(pop[c]), seats[c], total_pop, total_seats, tol);
  };
  auto all_balanced = [&] {
    for (std::size_t c = 0; c < f; ++c)
      if (!balanced(c)) return false;
    return true;
  };

  std::vector<std::vector<std::uint32_t>> members(f);
  auto rebuild_members = [&] {
    for (auto& m : members) m.clear();
    for (std::uint32_t v = 0; v < g.size(); ++v) members[static_cast<std::size_t>(owner[v])].push_back(v);
  };

  // Boundary-swap repair.
  const std::size_t max_swaps = 10 * g.size();
  std::vector<char> is_cut(g.size(), 0);
  std::vector<char> cut_valid(f, 0);
  for (std::size_t swaps = 0; !all_balanced(); ++swaps) {
    if (swaps >= max_swaps) return result;
    rebuild_members();
    double best_gain = 1e-9;
    std::uint32_t best_v = kUnreached;
    std::size_t best_to = f;
    std::fill(cut_valid.begin(), cut_valid.end(), 0);
    for (std::uint32_t v = 0; v < g.size(); ++v) {
      const auto from = static_cast<std::size_t>(owner[v]);
      if (members[from].size() <= 1) continue;
      const double p = static_cast<double>(g.population[v]);
      const double e_from = pop[from] - target[from];
      for (auto w : g.neighbors(v)) {
        const auto to = static_cast<std::size_t>(owner[w]);
        if (to == from) continue;
        const double e_to = pop[to] - target[to];
        const double gain =
            std::abs(e_from) + std::abs(e_to) - std::abs(e_from - p) - std::abs(e_to + p);
        if (gain <= best_gain) continue;
        if (!cut_valid[from]) {
          articulation_points(g, owner, static_cast<int>(from), members[from], is_cut);
          cut_valid[from] = 1;
        }
        if (is_cut[v]) continue;
        best_gain = gain;
        best_v = v;
        best_to = to;
      }
    }
    if (best_v == kUnreached) return result;
    const auto from = static_cast<std::size_t>(owner[best_v]);
    pop[from] -= static_cast<double>(g.population[best_v]);
    pop[best_to] += static_cast<double>(g.population[best_v]);
    owner[best_v] = static_cast<int>(best_to);
  }

  result.regions.assign(f, {});
  for (std::uint32_t v = 0; v < g.size(); ++v) result.regions[static_cast<std::size_t>(owner[v])].push_back(g.global[v]);
  for (auto& r : result.regions) {
    std::sort(r.begin(), r.end());
    if (!is_connected(state, r)) return {};
  }
  result.ok = true;
  return result;
}

struct Builder {
  const StateInstance& state;
  BalanceTolerance tol;
  SizeAllocation alloc;
  SampleCounts counts;
  int max_retries;
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> failures;
  std::vector<std::size_t> attempts;

  void bump(std::vector<std::size_t>& v, int depth) {
    if (v.size() <= static_cast<std::size_t>(depth)) v.resize(static_cast<std::size_t>(depth) + 1, 0);
    ++v[static_cast<std::size_t>(depth)];
  }

  // One sample of `parent` (copied in, since `nodes` may reallocate). On
  // success the children (and their subtrees) are appended and their ids
  // returned; on failure the arena is left unchanged.
  std::optional<std::vector<NodeId>> sample(const TreeNode& parent, std::uint64_t seed) {
    const RegionGraph g(state, parent.region);
    for (int retry = 0; retry < max_retries; ++retry) {
      bump(attempts, parent.depth);
      const auto attempt = derive_seed(seed, {static_cast<std::uint64_t>(retry)});
      Rng rng{attempt};
      const int fanout = draw_fanout(parent.n_districts, derive_seed(attempt, {1}));
      if (g.size() < static_cast<std::size_t>(fanout)) continue;
      const auto centers = select_local_centers(g, fanout, rng);
      const auto sizes = local_child_sizes(g, parent, centers, rng);
      auto split = local_split(state, g, parent, centers, sizes, alloc.small_size, tol, rng);
      if (!split.ok) continue;

      const std::size_t mark = nodes.size();
      std::vector<NodeId> children;
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        TreeNode child;
        child.region = std::move(split.regions[c]);
        child.seats = sizes[c].seats(alloc.small_size);
        child.n_districts = sizes[c].districts();
        child.n_small = sizes[c].n_small;
        child.n_large = sizes[c].n_large;
        child.depth = parent.depth + 1;
        children.push_back(static_cast<NodeId>(nodes.size()));
        nodes.push_back(std::move(child));
      }
      bool complete = true;
      for (std::size_t c = 0; c < children.size() && complete; ++c) {
        if (nodes[children[c]].is_leaf()) continue;
        complete = grow(children[c], counts.internal_samples, derive_seed(attempt, {2, c}));
      }
      if (complete) return children;
      nodes.resize(mark);
    }
    bump(failures, parent.depth);
    return std::nullopt;
  }

  // Samples node `id` n times; false when no sample survives.
  bool grow(NodeId id, int n, std::uint64_t seed) {
    const TreeNode parent = [&] {
      TreeNode copy;
      const auto& src = nodes[id];
      copy.region = src.region;
      copy.seats = src.seats;
      copy.n_districts = src.n_districts;
      copy.n_small = src.n_small;
      copy.n_large = src.n_large;
      copy.depth = src.depth;
      return copy;
    }();
    std::vector<std::vector<NodeId>> samples;
    for (int s = 0; s < n; ++s) {
      if (auto kids = sample(parent, derive_seed(seed, {static_cast<std::uint64_t>(s)}))) samples.push_back(*kids);
    }
    nodes[id].samples = std::move(samples);
    return !nodes[id].samples.empty();
  }
};

void merge_counts(std::vector<std::size_t>& into, const std::vector<std::size_t>& from) {
  if (into.size() < from.size()) into.resize(from.size(), 0);
  for (std::size_t i = 0; i < from.size(); ++i) into[i] += from[i];
}

TreeDiagnostics diagnose(const std::vector<TreeNode>& nodes, NodeId root) {
  TreeDiagnostics d;
  std::vector<char> reachable(nodes.size(), 0);
  std::vector<NodeId> stack{root};
  reachable[root] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto& s : nodes[v].samples)
      for (auto c : s)
        if (!reachable[c]) {
          reachable[c] = 1;
          stack.push_back(c);
        }
  }
  std::vector<double> count(nodes.size(), 0.0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    if (!reachable[i]) continue;
    ++d.node_count;
    if (nodes[i].is_leaf()) {
      ++d.leaf_count;
      count[i] = 1.0;
      continue;
    }
    ++d.internal_count;
    double total = 0.0;
    for (const auto& s : nodes[i].samples) {
      double prod = 1.0;
      for (auto c : s) prod *= count[c];
      total += prod;
    }
    count[i] = total;
  }
  d.implicit_plans = count[root];
  return d;
}

}  // namespace

SampleCounts sample_counts(int k) {
  if (k < 1) throw InputError("k must be >= 1");
  const auto root = std::lround(std::pow(1000.0 / k, 1.2));
  const auto internal = std::lround(std::pow(300.0 / k, 0.5));
  return {static_cast<int>(std::max(1L, root)), static_cast<int>(std::max(1L, internal))};
}

int draw_fanout(int n_districts, std::uint64_t seed) {
  if (n_districts < 2) throw InputError("fanout needs at least two districts");
  Rng rng{seed};
  return static_cast<int>(uniform_int(rng, 2, std::min(4, n_districts)));
}

std::vector<std::uint32_t> select_centers(const StateInstance& state, std::span<const std::uint32_t> region,
                                          int n_children, std::uint64_t seed) {
  std::vector<std::uint32_t> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  const RegionGraph g(state, sorted);
  Rng rng{seed};
  auto local = select_local_centers(g, n_children, rng);
  for (auto& c : local) c = g.global[c];
  return local;
}

std::vector<ChildSize> assign_child_sizes(const StateInstance& state, const TreeNode& node,
                                          std::span<const std::uint32_t> centers, std::uint64_t seed) {
  const RegionGraph g(state, node.region);
  std::vector<std::uint32_t> local;
  for (auto c : centers) local.push_back(g.local_of(c));
  Rng rng{seed};
  return local_child_sizes(g, node, local, rng);
}

std::optional<std::vector<std::vector<std::uint32_t>>> split_region(
    const StateInstance& state, const TreeNode& node, std::span<const std::uint32_t> centers,
    std::span<const ChildSize> child_sizes, int small_size, BalanceTolerance tol, std::uint64_t seed) {
  const RegionGraph g(state, node.region);
  std::vector<std::uint32_t> local;
  for (auto c : centers) local.push_back(g.local_of(c));
  Rng rng{seed};
  auto split = local_split(state, g, node, local, child_sizes, small_size, tol, rng);
  if (!split.ok) return std::nullopt;
  return std::move(split.regions);
}

SampleTree::SampleTree(std::vector<TreeNode> nodes, NodeId root, SizeAllocation allocation, BalanceTolerance tol,
                       std::uint64_t seed, TreeDiagnostics diagnostics)
    : nodes_(std::move(nodes)),
      root_(root),
      allocation_(allocation),
      tol_(tol),
      seed_(seed),
      diagnostics_(std::move(diagnostics)) {}

std::vector<NodeId> SampleTree::leaves() const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> out;
  std::vector<NodeId> stack{root_};
  seen[root_] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (nodes_[v].is_leaf()) out.push_back(v);
    for (const auto& s : nodes_[v].samples)
      for (auto c : s)
        if (!seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Plan SampleTree::plan_from_leaves(const StateInstance& state, std::span<const NodeId> leaves) const {
  Plan plan;
  for (auto id : leaves) {
    const auto& n = nodes_[id];
    District d;
    d.seats = n.seats;
    d.blocks.reserve(n.region.size());
    for (auto i : n.region) d.blocks.push_back(state.block(i).id);
    plan.districts.push_back(std::move(d));
  }
  return plan;
}

SampleTree SampleTree::with_root_samples(std::size_t keep) const {
  auto nodes = nodes_;
  auto& samples = nodes[root_].samples;
  if (samples.size() > keep) samples.resize(keep);
  auto diag = diagnose(nodes, root_);
  diag.failures_per_depth = diagnostics_.failures_per_depth;
  diag.attempts_per_depth = diagnostics_.attempts_per_depth;
  return SampleTree(std::move(nodes), root_, allocation_, tol_, seed_, std::move(diag));
}

SampleTree build_tree(const StateInstance& state, int k, BalanceTolerance tol, std::uint64_t seed,
                      const TreeOptions& options) {
  const auto alloc = SizeAllocation::make(state.total_seats(), k);
  const auto counts = options.counts.value_or(sample_counts(k));

  TreeNode root;
  root.region.resize(state.size());
  std::iota(root.region.begin(), root.region.end(), 0u);
  root.seats = state.total_seats();
  root.n_districts = k;
  root.n_small = alloc.small_count;
  root.n_large = alloc.large_count;

  std::vector<TreeNode> nodes;
  nodes.push_back(std::move(root));
  std::vector<std::size_t> failures, attempts;

  if (k > 1) {
    // Root samples are independent: each builds into its own arena, then the
    // arenas are spliced in sample order.
    const auto n = static_cast<std::size_t>(counts.root_samples);
    std::vector<Builder> parts;
    parts.reserve(n);
    for (std::size_t s = 0; s < n; ++s) parts.push_back(Builder{state, tol, alloc, counts, options.max_retries, {}, {}, {}});
    std::vector<std::optional<std::vector<NodeId>>> kids(n);
    const TreeNode& root_ref = nodes.front();
    parallel_for(n, options.threads, [&](std::size_t s) {
      // Local ids start at 1 so they can be offset uniformly below.
      parts[s].nodes.emplace_back();
      kids[s] = parts[s].sample(root_ref, derive_seed(seed, {0x7ee, s}));
    });
    for (std::size_t s = 0; s < n; ++s) {
      merge_counts(failures, parts[s].failures);
      merge_counts(attempts, parts[s].attempts);
      if (!kids[s]) continue;
      const auto offset = static_cast<NodeId>(nodes.size() - 1);
      auto& local = parts[s].nodes;
      for (std::size_t i = 1; i < local.size(); ++i) {
        for (auto& sample : local[i].samples)
          for (auto& c : sample) c += offset;
        nodes.push_back(std::move(local[i]));
      }
      auto ids = *kids[s];
      for (auto& c : ids) c += offset;
      nodes.front().samples.push_back(std::move(ids));
    }
    if (nodes.front().samples.empty())
      throw BuildError("no feasible map found for k = " + std::to_string(k) + " after " +
                       std::to_string(n) + " root samples");
  }

  auto diag = diagnose(nodes, 0);
  diag.failures_per_depth = std::move(failures);
  diag.attempts_per_depth = std::move(attempts);
  return SampleTree(std::move(nodes), 0, alloc, tol, seed, std::move(diag));
}

std::vector<std::vector<NodeId>> sample_leaf_sets(const SampleTree& tree, std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<NodeId>> out;
  out.reserve(count);
  Rng rng = make_rng(seed, {0x5a301e});
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<NodeId> leaves;
    std::vector<NodeId> stack{tree.root()};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const auto& node = tree.node(v);
      if (node.is_leaf()) {
        leaves.push_back(v);
        continue;
      }
      const auto& s =
          node.samples[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(node.samples.size()) - 1))];
      for (auto it = s.rbegin(); it != s.rend(); ++it) stack.push_back(*it);
    }
    out.push_back(std::move(leaves));
  }
  return out;
}

std::vector<Plan> sample_plans(const SampleTree& tree, const StateInstance& state, std::size_t count,
                               std::uint64_t seed) {
  std::vector<Plan> plans;
  plans.reserve(count);
  for (const auto& leaves : sample_leaf_sets(tree, count, seed)) plans.push_back(tree.plan_from_leaves(state, leaves));
  return plans;
}

std::string diagnostics_to_json(const TreeDiagnostics& d) {
  nlohmann::json j = {{"node_count", d.node_count},
                      {"leaf_count", d.leaf_count},
                      {"internal_count", d.internal_count},
                      {"failures_per_depth", d.failures_per_depth},
                      {"attempts_per_depth", d.attempts_per_depth},
                      {"implicit_plans", d.implicit_plans},
                      {"center_method", d.center_method}};
  return j.dump(1) + "\n";
}

}  // namespace mmd
