#include "mmd/plan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace mmd {

SizeAllocation SizeAllocation::make(int seats, int districts) {
  if (districts < 1 || districts > seats)
    throw InputError("district count " + std::to_string(districts) + " must lie in [1, " + std::to_string(seats) +
                     "]");
  SizeAllocation a;
  a.small_size = seats / districts;
  a.large_count = seats % districts;
  a.small_count = districts - a.large_count;
  return a;
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::empty_plan: return "empty_plan";
    case ViolationKind::unknown_block: return "unknown_block";
    case ViolationKind::duplicate_block: return "duplicate_block";
    case ViolationKind::missing_block: return "missing_block";
    case ViolationKind::empty_district: return "empty_district";
    case ViolationKind::invalid_seats: return "invalid_seats";
    case ViolationKind::contiguity: return "contiguity";
    case ViolationKind::balance: return "balance";
    case ViolationKind::seat_total: return "seat_total";
    case ViolationKind::size_allocation: return "size_allocation";
  }
  return "unknown";
}

double district_vote_share(const StateInstance& state, std::span<const std::uint32_t> block_indices) {
  double r = 0.0, d = 0.0;
  for (auto i : block_indices) {
    r += state.block(i).votes_r;
    d += state.block(i).votes_d;
  }
  return two_party_share(r, d);
}

double district_vote_share(const StateInstance& state, const District& district) {
  std::vector<std::uint32_t> idx;
  idx.reserve(district.blocks.size());
  for (BlockId id : district.blocks) idx.push_back(static_cast<std::uint32_t>(state.index_of(id)));
  return district_vote_share(state, idx);
}

bool within_balance(std::int64_t population, int seats, std::int64_t total_population, int total_seats,
                    BalanceTolerance tol) {
  const double target = static_cast<double>(seats) / total_seats;
  const double ratio = static_cast<double>(population) / static_cast<double>(total_population);
  return std::abs(ratio - target) <= tol.epsilon() * target * (1.0 + 1e-12) + 1e-15;
}

bool is_connected(const StateInstance& state, std::span<const std::uint32_t> block_indices) {
  if (block_indices.empty()) return false;
  // Stamp membership in a scratch array sized to the state.
  std::vector<char> member(state.size(), 0);
  for (auto i : block_indices) member[i] = 1;
  std::vector<std::uint32_t> stack{block_indices.front()};
  member[block_indices.front()] = 2;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : state.neighbors(v)) {
      if (member[w] == 1) {
        member[w] = 2;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == block_indices.size();
}

Point population_centroid(const StateInstance& state, std::span<const std::uint32_t> block_indices) {
  double wx = 0.0, wy = 0.0, w = 0.0;
  for (auto i : block_indices) {
    const auto& b = state.block(i);
    wx += static_cast<double>(b.population) * b.centroid.x;
    wy += static_cast<double>(b.population) * b.centroid.y;
    w += static_cast<double>(b.population);
  }
  if (w <= 0.0) {
    for (auto i : block_indices) {
      wx += state.block(i).centroid.x;
      wy += state.block(i).centroid.y;
    }
    w = static_cast<double>(block_indices.size());
  }
  if (w <= 0.0) return {};
  return {wx / w, wy / w};
}

std::vector<Violation> validate_plan(const StateInstance& state, const Plan& plan, BalanceTolerance tol) {
  std::vector<Violation> out;
  if (plan.districts.empty()) {
    out.push_back({ViolationKind::empty_plan, -1, "plan has no districts"});
    return out;
  }

  std::vector<int> owner(state.size(), -1);
  int seat_total = 0;
  std::vector<std::vector<std::uint32_t>> members(plan.districts.size());

  for (std::size_t k = 0; k < plan.districts.size(); ++k) {
    const auto& d = plan.districts[k];
    const int ki = static_cast<int>(k);
    if (d.seats < 1) out.push_back({ViolationKind::invalid_seats, ki, "seats = " + std::to_string(d.seats)});
    seat_total += d.seats;
    if (d.blocks.empty()) out.push_back({ViolationKind::empty_district, ki, "district has no blocks"});
    for (BlockId id : d.blocks) {
      if (!state.contains(id)) {
        out.push_back({ViolationKind::unknown_block, ki, "block " + std::to_string(id) + " not in state"});
        continue;
      }
      const auto i = state.index_of(id);
      if (owner[i] != -1) {
        out.push_back({ViolationKind::duplicate_block, ki,
                       "block " + std::to_string(id) + " already in district " + std::to_string(owner[i])});
        continue;
      }
      owner[i] = ki;
      members[k].push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (owner[i] == -1)
      out.push_back({ViolationKind::missing_block, -1, "block " + std::to_string(state.block(i).id) + " unassigned"});
  }

  for (std::size_t k = 0; k < plan.districts.size(); ++k) {
    const int ki = static_cast<int>(k);
    if (!members[k].empty() && !is_connected(state, members[k]))
      out.push_back({ViolationKind::contiguity, ki, "district is not contiguous"});
    if (plan.districts[k].seats >= 1 && !members[k].empty()) {
      std::int64_t pop = 0;
      for (auto i : members[k]) pop += state.block(i).population;
      if (!within_balance(pop, plan.districts[k].seats, state.total_population(), state.total_seats(), tol)) {
        out.push_back({ViolationKind::balance, ki,
                       "population " + std::to_string(pop) + " outside tolerance for " +
                           std::to_string(plan.districts[k].seats) + " seats"});
      }
    }
  }

  if (seat_total != state.total_seats()) {
    out.push_back({ViolationKind::seat_total, -1,
                   "seats sum to " + std::to_string(seat_total) + ", state has " + std::to_string(state.total_seats())});
  }

  const int n = state.total_seats();
  const int k = static_cast<int>(plan.districts.size());
  if (k > n) {
    out.push_back({ViolationKind::size_allocation, -1, "more districts than seats"});
  } else {
    const auto alloc = SizeAllocation::make(n, k);
    int large = 0;
    bool bad_size = false;
    for (const auto& d : plan.districts) {
      if (d.seats == alloc.small_size + 1) ++large;
      else if (d.seats != alloc.small_size) bad_size = true;
    }
    if (bad_size || large != alloc.large_count) {
      out.push_back({ViolationKind::size_allocation, -1,
                     "expected " + std::to_string(alloc.small_count) + " districts of " +
                         std::to_string(alloc.small_size) + " seats and " + std::to_string(alloc.large_count) +
                         " of " + std::to_string(alloc.small_size + 1)});
    }
  }
  return out;
}

}  // namespace mmd
