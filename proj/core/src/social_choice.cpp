#include "mmd/social_choice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmd {

SeatShareRule SeatShareRule::from_name(std::string_view name) {
  if (name == "wta") return SeatShareRule(RuleKind::winner_take_all);
  if (name == "pav") return SeatShareRule(RuleKind::pav);
  if (name == "stv") return SeatShareRule(RuleKind::stv);
  if (name == "thiele2") return SeatShareRule(RuleKind::thiele_squared);
  throw InputError("unknown rule \"" + std::string(name) + "\" (expected wta, pav, stv, thiele2)");
}

std::string_view SeatShareRule::name() const {
  switch (kind_) {
    case RuleKind::winner_take_all: return "wta";
    case RuleKind::pav: return "pav";
    case RuleKind::thiele_squared: return "thiele2";
    case RuleKind::stv: return "stv";
  }
  return "?";
}

double SeatShareRule::lambda(int i) const {
  switch (kind_) {
    case RuleKind::winner_take_all: return 1.0;
    case RuleKind::pav:
    case RuleKind::stv: return 1.0 / i;
    case RuleKind::thiele_squared: return 1.0 / (static_cast<double>(i) * i);
  }
  return 0.0;
}

SeatOutcome thiele_seats(double y_r, int m, const SeatShareRule& rule) {
  // prefix[n] = sum_{i<=n} lambda(i)
  std::vector<double> prefix(static_cast<std::size_t>(m) + 1, 0.0);
  for (int i = 1; i <= m; ++i) prefix[i] = prefix[i - 1] + rule.lambda(i);

  int best_n = 0;
  double best = (1.0 - y_r) * prefix[m];
  for (int n = 1; n <= m; ++n) {
    const double score = y_r * prefix[n] + (1.0 - y_r) * prefix[m - n];
    if (score > best + kTieEpsilon * std::max(1.0, std::abs(best))) {
      best = score;
      best_n = n;
    }
  }
  return {best_n, m - best_n};
}

SeatOutcome stv_seats(double y_r, int m) {
  // n < y(m+1)  <=>  R wins seat n iff y(m+1) > n, compared against the exact
  // integer boundary with a relative tie band.
  const double scaled = y_r * (m + 1);
  int n = 0;
  for (int k = 1; k <= m; ++k) {
    if (scaled - k > kTieEpsilon * k) n = k;
  }
  return {n, m - n};
}

SeatOutcome seats_for(double y_r, int m, const SeatShareRule& rule) {
  return rule.is_stv() ? stv_seats(y_r, m) : thiele_seats(y_r, m, rule);
}

std::vector<double> seat_thresholds(int m, const SeatShareRule& rule) {
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int n = 1; n <= m; ++n) {
    if (rule.kind() == RuleKind::stv || rule.kind() == RuleKind::pav) {
      t[n - 1] = static_cast<double>(n) / (m + 1);
    } else {
      const double a = rule.lambda(n);
      const double b = rule.lambda(m - n + 1);
      t[n - 1] = b / (a + b);
    }
  }
  return t;
}

double expected_seats(double y_r, int m, const SeatShareRule& rule, UncertaintyModel u) {
  if (u.sigma <= 0.0) return seats_for(y_r, m, rule).seats_r;
  double total = 0.0;
  for (double t : seat_thresholds(m, rule)) total += 0.5 * std::erfc((t - y_r) / (u.sigma * std::sqrt(2.0)));
  return total;
}

}  // namespace mmd
