#pragma once

// Closed-form ball constants and random-simplex moments, evaluated in
// natural-log space. kappa_{d(d+k+1)} underflows a double long before the
// quantities of interest do, so nothing is exponentiated until value().

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "geomprob/linalg.hpp"

namespace geomprob::exact {

/// sign * exp(log_magnitude); sign 0 means exactly zero.
struct ExactValue {
  double log_magnitude = 0.0;
  int sign = 1;

  static ExactValue from_log(double log_mag, int sign = 1) { return {log_mag, sign}; }
  static ExactValue from_double(double x) {
    if (x == 0.0) return {0.0, 0};
    return {std::log(std::abs(x)), x > 0 ? 1 : -1};
  }

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_magnitude); }

  friend ExactValue operator*(ExactValue a, ExactValue b) {
    return {a.log_magnitude + b.log_magnitude, a.sign * b.sign};
  }
  friend ExactValue operator/(ExactValue a, ExactValue b) {
    require(b.sign != 0, "division by an exact zero");
    return {a.log_magnitude - b.log_magnitude, a.sign * b.sign};
  }
  ExactValue pow(int e) const {
    if (e == 0) return {0.0, 1};
    return {e * log_magnitude, (e % 2 == 0 && sign != 0) ? 1 : sign};
  }
  friend ExactValue operator+(ExactValue a, ExactValue b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    require(a.sign == b.sign, "ExactValue addition is defined for equal signs only");
    const double hi = std::max(a.log_magnitude, b.log_magnitude);
    const double lo = std::min(a.log_magnitude, b.log_magnitude);
    return {hi + std::log1p(std::exp(lo - hi)), a.sign};
  }
};

inline double log_kappa(double d) {
  return 0.5 * d * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * d);
}

/// Volume of the unit d-ball.
inline ExactValue kappa(std::int64_t d) {
  require(d >= 0 && d <= 1000000, "kappa: d out of range");
  return ExactValue::from_log(log_kappa(static_cast<double>(d)));
}

/// Surface measure of the unit (d-1)-sphere, d * kappa_d.
inline ExactValue omega(std::int64_t d) {
  require(d >= 1 && d <= 1000000, "omega: d out of range");
  return ExactValue::from_log(std::log(static_cast<double>(d)) + log_kappa(static_cast<double>(d)));
}

namespace detail {
inline double log_factorial(int n) { return std::lgamma(n + 1.0); }

// log(omega_1 ... omega_k / (omega_{d+1} ... omega_{d+k}))
inline double log_omega_ratio(int d, int k) {
  double s = 0.0;
  for (int i = 1; i <= k; ++i) s += omega(i).log_magnitude - omega(d + i).log_magnitude;
  return s;
}

inline void check_dk(int d, int k) {
  require(d >= 1, "dimension must be >= 1");
  require(k >= 1, "moment order must be >= 1");
}
}  // namespace detail

/// E(V^k) for the random simplex of d+1 uniform points in B_d (Kingman).
inline ExactValue ball_simplex_moment(int d, int k) {
  detail::check_dk(d, k);
  const double lk = -k * detail::log_factorial(d) +
                    (d + 1) * (log_kappa(d + k) - log_kappa(d)) +
                    log_kappa(static_cast<double>(d) * (d + k + 1)) -
                    log_kappa(static_cast<double>(d + 1) * (d + k)) +
                    detail::log_omega_ratio(d, k);
  return ExactValue::from_log(lk);
}

/// E((vol conv(0, X_1..X_d))^k) for X_i uniform in B_d.
inline ExactValue ball_pinned_moment(int d, int k) {
  detail::check_dk(d, k);
  const double lk = -k * detail::log_factorial(d) + d * (log_kappa(d + k) - log_kappa(d)) +
                    detail::log_omega_ratio(d, k);
  return ExactValue::from_log(lk);
}

/// Minimum over bodies of E(vol conv(0, X_1..X_d)) / vol K, attained by
/// origin-centred ellipsoids.
inline ExactValue busemann_min_ratio(int d) {
  require(d >= 1, "dimension must be >= 1");
  const double lk = -detail::log_factorial(d) + d * log_kappa(d + 1) - (d + 1) * log_kappa(d) +
                    std::log(2.0) - omega(d + 1).log_magnitude;
  return ExactValue::from_log(lk);
}

struct RatioBounds {
  double lower;
  double value;
  double upper;
};

/// sqrt(d/2pi) <= kappa_{d-1}/kappa_d <= sqrt((d+1)/2pi).
inline RatioBounds kappa_ratio_bounds(int d) {
  require(d >= 1, "dimension must be >= 1");
  const double two_pi = 2.0 * std::numbers::pi;
  return {std::sqrt(d / two_pi), std::exp(log_kappa(d - 1) - log_kappa(d)),
          std::sqrt((d + 1) / two_pi)};
}

/// 2^k (kappa_d/kappa_{d+k}) (kappa_{(d+1)(d+k)}/kappa_{d(d+k+1)}): upper bound
/// on pinned-at-origin moment over half-ball moment.
inline ExactValue moment_ratio_bound(int d, int k) {
  require(d >= 2, "moment_ratio_bound needs d >= 2");
  require(k >= 1, "moment order must be >= 1");
  const double lk = k * std::log(2.0) + log_kappa(d) - log_kappa(d + k) +
                    log_kappa(static_cast<double>(d + 1) * (d + k)) -
                    log_kappa(static_cast<double>(d) * (d + k + 1));
  return ExactValue::from_log(lk);
}

/// Elementary bound 2^k ((d+k+1)/(d(d+k+1)+k))^{k/2}, valid for d >= 4.
inline double chain_bound(int d, int k) {
  if (d < 4) throw Error("chain_bound is only claimed for d >= 4");
  require(k >= 1, "moment order must be >= 1");
  const double num = d + k + 1.0;
  const double den = static_cast<double>(d) * (d + k + 1) + k;
  return std::pow(2.0, k) * std::pow(num / den, 0.5 * k);
}

/// Smallest k <= k_max with moment_ratio_bound(d, k) < 1 - 1e-12.
inline std::optional<int> find_k0(int d, int k_max = 200) {
  require(d >= 2, "find_k0 needs d >= 2");
  const double threshold = std::log1p(-1e-12);
  for (int k = 1; k <= k_max; ++k)
    if (moment_ratio_bound(d, k).log_magnitude < threshold) return k;
  return std::nullopt;
}

}  // namespace geomprob::exact
