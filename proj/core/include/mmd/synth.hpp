#pragma once

#include <cstdint>

#include "mmd/state.hpp"

namespace mmd {

struct SynthParams {
  int n_blocks = 144;
  int seats = 6;
  double r_share = 0.5;
  /// Gaussian smoothing bandwidth of the partisan field in grid cells;
  /// 0 gives independent blocks.
  double spatial_correlation = 0.0;
  std::uint64_t seed = 0;
};

/// Grid spacing of synthetic blocks in kilometers.
inline constexpr double kSyntheticBlockKm = 2.0;
/// Persons per synthetic block.
inline constexpr std::int64_t kSyntheticBlockPopulation = 1000;

/// Rows and columns of the most nearly square grid holding n blocks.
struct GridShape {
  int rows = 1;
  int cols = 1;
};
GridShape grid_shape(int n_blocks);

/// A 4-neighbour lattice state whose block R shares form a smoothed random
/// field rescaled so the statewide share equals r_share. Deterministic in seed.
StateInstance generate_synthetic_state(const SynthParams& params);

}  // namespace mmd
