#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmd/state.hpp"

namespace mmd {

/// Relative population tolerance. A district with N_k seats must satisfy
/// |pop_k / pop - N_k / N| <= epsilon * N_k / N.
class BalanceTolerance {
 public:
  constexpr BalanceTolerance() = default;
  explicit BalanceTolerance(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InputError("balance tolerance must lie in [0, 1)");
  }
  constexpr double epsilon() const { return epsilon_; }

 private:
  double epsilon_ = 0.01;
};

struct District {
  std::vector<BlockId> blocks;
  int seats = 1;
};

struct Plan {
  std::vector<District> districts;
};

/// How N seats split into K districts: K - L districts of size j and L of size
/// j + 1, with j = floor(N / K) and L = N mod K.
struct SizeAllocation {
  int small_size = 1;
  int large_count = 0;
  int small_count = 1;

  /// Throws InputError unless 1 <= districts <= seats.
  static SizeAllocation make(int seats, int districts);
  int districts() const { return small_count + large_count; }
  int seats() const { return small_count * small_size + large_count * (small_size + 1); }
};

enum class ViolationKind {
  empty_plan,
  unknown_block,
  duplicate_block,
  missing_block,
  empty_district,
  invalid_seats,
  contiguity,
  balance,
  seat_total,
  size_allocation,
};

std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  int district = -1;  // -1 when the violation concerns the whole plan
  std::string detail;
};

/// R share of the district's two-party vote (0.5 for zero votes). Throws
/// InputError for unknown block ids.
double district_vote_share(const StateInstance& state, const District& district);
double district_vote_share(const StateInstance& state, std::span<const std::uint32_t> block_indices);

/// Every violated plan constraint; empty iff the plan is valid.
std::vector<Violation> validate_plan(const StateInstance& state, const Plan& plan,
                                     BalanceTolerance tol = {});

/// Balance test shared by the validator and the tree builder.
bool within_balance(std::int64_t population, int seats, std::int64_t total_population,
                    int total_seats, BalanceTolerance tol);

/// Whether the induced subgraph on `block_indices` is connected.
bool is_connected(const StateInstance& state, std::span<const std::uint32_t> block_indices);

/// Population-weighted centroid of the district blocks (plain mean if the
/// population is zero).
Point population_centroid(const StateInstance& state, std::span<const std::uint32_t> block_indices);

}  // namespace mmd
