#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mmd/state.hpp"

namespace mmd {

enum class RuleKind { winner_take_all, pav, thiele_squared, stv };

/// A social-choice rule mapping a district vote share to a partisan seat
/// split: one of the Thiele family (lambda weights) or STV.
class SeatShareRule {
 public:
  constexpr SeatShareRule() = default;
  constexpr explicit SeatShareRule(RuleKind kind) : kind_(kind) {}

  /// Accepts "wta", "pav", "stv", "thiele2"; throws InputError otherwise.
  static SeatShareRule from_name(std::string_view name);

  RuleKind kind() const { return kind_; }
  std::string_view name() const;
  bool is_stv() const { return kind_ == RuleKind::stv; }

  /// lambda(i) for i >= 1. STV reports the PAV weights, which give the same
  /// partisan split under party-line ballots.
  double lambda(int i) const;

  friend bool operator==(SeatShareRule, SeatShareRule) = default;

 private:
  RuleKind kind_ = RuleKind::stv;
};

inline constexpr RuleKind kAllRules[] = {RuleKind::winner_take_all, RuleKind::pav, RuleKind::thiele_squared,
                                         RuleKind::stv};

struct SeatOutcome {
  int seats_r = 0;
  int seats_d = 0;
  friend bool operator==(const SeatOutcome&, const SeatOutcome&) = default;
};

/// Standard deviation of the district vote share around its historical value.
struct UncertaintyModel {
  double sigma = 0.05;
};

/// Relative tolerance used for floating tie detection.
inline constexpr double kTieEpsilon = 1e-12;

/// Smallest maximiser over n in [0, m] of
///   y * sum_{i<=n} lambda(i) + (1 - y) * sum_{i<=m-n} lambda(i),
/// so exact ties go to party D.
SeatOutcome thiele_seats(double y_r, int m, const SeatShareRule& rule);

/// Unique n with y(m+1) - 1 <= n < y(m+1); exact boundaries resolve to D.
SeatOutcome stv_seats(double y_r, int m);

/// Dispatches to stv_seats or thiele_seats.
SeatOutcome seats_for(double y_r, int m, const SeatShareRule& rule);

/// Ascending vote shares t_1..t_m such that party R holds at least n seats iff
/// y > t_n.
std::vector<double> seat_thresholds(int m, const SeatShareRule& rule);

/// E[R seats] for a Gaussian vote share N(y_r, sigma^2); sigma = 0 gives the
/// deterministic seat count.
double expected_seats(double y_r, int m, const SeatShareRule& rule, UncertaintyModel u);

}  // namespace mmd
