#include "mmd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mmd/rng.hpp"

namespace mmd {

namespace {

// Spread of block log-odds around the statewide log-odds, before rescaling.
constexpr double kFieldAmplitude = 1.0;
constexpr double kTurnout = 0.5;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> smoothed_field(const GridShape& g, double bandwidth, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols);
  std::vector<double> noise(n);
  for (auto& z : noise) z = standard_normal(rng);
  if (bandwidth <= 0.0) return noise;

  const int radius = static_cast<int>(std::ceil(3.0 * bandwidth));
  const double inv2s2 = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<double> out(n, 0.0);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      double acc = 0.0;
      for (int rr = std::max(0, r - radius); rr <= std::min(g.rows - 1, r + radius); ++rr) {
        for (int cc = std::max(0, c - radius); cc <= std::min(g.cols - 1, c + radius); ++cc) {
          const double d2 = static_cast<double>((rr - r) * (rr - r) + (cc - c) * (cc - c));
          acc += std::exp(-d2 * inv2s2) * noise[static_cast<std::size_t>(rr * g.cols + cc)];
        }
      }
      out[static_cast<std::size_t>(r * g.cols + c)] = acc;
    }
  }
  return out;
}

void standardize(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  for (double& x : v) x = sd > 1e-12 ? (x - mean) / sd : 0.0;
}

}  // namespace

GridShape grid_shape(int n_blocks) {
  GridShape g;
  for (int r = static_cast<int>(std::sqrt(static_cast<double>(n_blocks))); r >= 1; --r) {
    if (n_blocks % r == 0) {
      g.rows = r;
      g.cols = n_blocks / r;
      break;
    }
  }
  return g;
}

StateInstance generate_synthetic_state(const SynthParams& p) {
  if (p.n_blocks < 1) throw InputError("n_blocks must be positive");
  if (p.seats < 1) throw InputError("seats must be positive");
  if (!(p.r_share > 0.0 && p.r_share < 1.0)) throw InputError("r_share must lie in (0, 1)");
  if (!(p.spatial_correlation >= 0.0) || !std::isfinite(p.spatial_correlation))
    throw InputError("spatial_correlation must be finite and >= 0");

  const GridShape g = grid_shape(p.n_blocks);
  Rng rng = make_rng(p.seed, {0x5e77});
  std::vector<double> field = smoothed_field(g, p.spatial_correlation, rng);
  standardize(field);

  // Shift the log-odds so the mean block share (equal turnout) hits r_share.
  auto mean_share = [&](double offset) {
    double s = 0.0;
    for (double z : field) s += logistic(offset + kFieldAmplitude * z);
    return s / static_cast<double>(field.size());
  };
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_share(mid) < p.r_share ? lo : hi) = mid;
  }
  const double offset = 0.5 * (lo + hi);

  std::vector<Block> blocks;
  std::vector<std::vector<BlockId>> neighbors;
  blocks.reserve(static_cast<std::size_t>(p.n_blocks));
  const double votes = kTurnout * static_cast<double>(kSyntheticBlockPopulation);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      const BlockId id = static_cast<BlockId>(r) * g.cols + c;
      const double share = logistic(offset + kFieldAmplitude * field[static_cast<std::size_t>(id)]);
      blocks.push_back({id, kSyntheticBlockPopulation, share * votes, (1.0 - share) * votes,
                        {c * kSyntheticBlockKm, r * kSyntheticBlockKm}});
      std::vector<BlockId> nb;
      if (r > 0) nb.push_back(id - g.cols);
      if (c > 0) nb.push_back(id - 1);
      if (c + 1 < g.cols) nb.push_back(id + 1);
      if (r + 1 < g.rows) nb.push_back(id + g.cols);
      neighbors.push_back(std::move(nb));
    }
  }
  return StateInstance(std::move(blocks), neighbors, p.seats);
}

}  // namespace mmd
