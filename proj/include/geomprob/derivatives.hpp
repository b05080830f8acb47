#pragma once

// Derivatives of expectations along a moving halfspace cut, and their
// finite-difference check.
//
// A cut family is K_t = K ∩ {<v,x> >= t} for t in [a, b). Both derivative
// formulas are stated at the left end of a family; at interior t the family
// is re-based at K_t, which is a convex body whose own infimum along v is t.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "geomprob/batch.hpp"
#include "geomprob/bodies.hpp"
#include "geomprob/estimators.hpp"
#include "geomprob/sampling.hpp"

namespace geomprob {

inline constexpr double kIsotropyTolerance = 0.05;

struct CutFamily {
  BodyPtr body;
  Point v;
  double a = 0.0;  // inf <v,x>
  double b = 0.0;  // sup <v,x>

  /// K_t; K itself for t <= a.
  ConvexBody at(double t) const {
    require(t < b, "cut position must be below sup <v,x>");
    if (t <= a) return *body;
    return intersect_halfspace(*body, Halfspace(v, t));
  }
  double width() const { return b - a; }
};

/// Cut family with a known range.
inline CutFamily make_cut_family(const ConvexBody& body, const Point& v, double a, double b) {
  require(v.dim() == body.dim(), "cut direction dimension mismatch");
  require(std::abs(norm(v) - 1.0) <= 1e-12, "cut direction must be a unit vector");
  require(a < b, "cut family needs a < b");
  return {share(body), v, a, b};
}

/// Cut family with a and b from the analytic support function when there is
/// one, otherwise from the extremes of `probe` sampled points.
inline CutFamily make_cut_family(const ConvexBody& body, const Point& v, std::uint64_t probe = 1 << 18,
                                 Seed seed = Seed{0x5eed}) {
  require(v.dim() == body.dim(), "cut direction dimension mismatch");
  std::optional<double> hi = support(body, v);
  std::optional<double> lo_neg = support(body, v * -1.0);
  if (!hi || !lo_neg) {
    const BodySampler sampler(body);
    double mn = HUGE_VAL, mx = -HUGE_VAL;
    for (std::uint64_t j = 0; j < probe; ++j) {
      SampleStream s(mix(seed.value, j));
      const double l = dot(v, sampler.draw(s));
      mn = std::min(mn, l);
      mx = std::max(mx, l);
    }
    if (!hi) hi = mx;
    if (!lo_neg) lo_neg = -mn;
  }
  return make_cut_family(body, v, -*lo_neg, *hi);
}

// ---------------------------------------------------------------------------
// Symmetric functions

struct SymmetricFunction {
  int arity = 1;
  std::function<double(std::span<const Point>)> eval;
  std::string name;
};

inline SymmetricFunction constant_one() {
  return {1, [](std::span<const Point>) { return 1.0; }, "one"};
}

/// f(x) = x_1 + ... + x_d.
inline SymmetricFunction coordinate_sum() {
  return {1,
          [](std::span<const Point> x) {
            double s = 0.0;
            for (int i = 0; i < x[0].dim(); ++i) s += x[0][i];
            return s;
          },
          "coordsum"};
}

/// f(x_0..x_d) = vol conv(x_0..x_d).
inline SymmetricFunction simplex_volume_function(int d) {
  require(d >= 1 && d <= kMaxDim, "dimension out of range");
  const double inv_fact = detail::inverse_factorial(d);
  return {d + 1, [d, inv_fact](std::span<const Point> x) { return detail::simplex_volume_raw(x.data(), d, inv_fact); },
          "simplexvol"};
}

/// Builtin by name: one, coordsum, simplexvol.
inline SymmetricFunction symmetric_function(const std::string& name, int d) {
  if (name == "one") return constant_one();
  if (name == "coordsum") return coordinate_sum();
  if (name == "simplexvol") return simplex_volume_function(d);
  throw Error("unknown function '" + name + "' (expected one, coordsum, simplexvol)");
}

/// Spot-checks permutation invariance on `trials` random tuples in [-1,1]^d.
inline bool is_symmetric(const SymmetricFunction& f, int d, int trials = 100, Seed seed = Seed{17}) {
  std::vector<Point> x(static_cast<std::size_t>(f.arity), Point(d));
  std::vector<Point> y = x;
  std::vector<int> perm(static_cast<std::size_t>(f.arity));
  for (int trial = 0; trial < trials; ++trial) {
    SampleStream s(mix(seed.value, static_cast<std::uint64_t>(trial)));
    for (auto& p : x)
      for (int i = 0; i < d; ++i) p[i] = 2.0 * s.uniform() - 1.0;
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = f.arity - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(s.next_u64() % (i + 1))]);
    for (int i = 0; i < f.arity; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    if (std::abs(f.eval(x) - f.eval(y)) > 1e-12) return false;
  }
  return true;
}

/// E f(X_1..X_q) for independent uniform points in the body.
inline MomentEstimate expectation_estimate(const ConvexBody& body, const SymmetricFunction& f, std::uint64_t n,
                                           Seed seed) {
  require(f.arity >= 1 && f.arity <= kMaxDim + 1, "function arity out of range");
  const BodySampler sampler(body);
  const BatchSums sums = run_tuples(n, seed, 1, [&](SampleStream& s, std::span<double> out) {
    Point pts[kMaxDim + 1];
    for (int i = 0; i < f.arity; ++i) pts[i] = sampler.draw(s);
    out[0] = f.eval(std::span<const Point>(pts, static_cast<std::size_t>(f.arity)));
  });
  return output_estimate(sums, 0, seed);
}

// ---------------------------------------------------------------------------
// Right-hand sides

namespace detail {

/// Standard error of c * x * y / z for independent estimates.
inline double product_stderr(double c, const MomentEstimate& x, const MomentEstimate& y, const MomentEstimate& z) {
  const double a = c * y.mean / z.mean * x.std_error;
  const double b = c * x.mean / z.mean * y.std_error;
  const double e = c * x.mean * y.mean / (z.mean * z.mean) * z.std_error;
  return std::sqrt(a * a + b * b + e * e);
}

/// Zero when the slice is a point or empty (no proposal lands), which makes
/// the whole right-hand side exactly zero.
inline MomentEstimate slice_measure_at(const CutFamily& fam, double t, std::uint64_t n, Seed seed) {
  require(t >= fam.a && t < fam.b, "cut position must lie in [a, b)");
  return slice_measure(*fam.body, fam.v, t, n, seed);
}

inline MomentEstimate exact_zero(std::uint64_t n, Seed seed) {
  MomentEstimate e;
  e.n = n;
  e.seed = seed;
  return e;
}

}  // namespace detail

/// q (E f - E[f | X_1 in S_t]) vol_{d-1}(S_t) / vol K_t. Both expectations
/// share X_2..X_q, so the bracket is a mean of per-tuple differences and is
/// exactly zero for constant f.
inline MomentEstimate crofton_derivative_rhs(const CutFamily& fam, double t, const SymmetricFunction& f,
                                             std::uint64_t n, Seed seed) {
  require(f.arity >= 1 && f.arity <= kMaxDim + 1, "function arity out of range");
  const ConvexBody kt = fam.at(t);
  const MomentEstimate slice = detail::slice_measure_at(fam, t, n, seed.substream(1));
  if (slice.mean == 0.0) return detail::exact_zero(n, seed);
  const MomentEstimate vol = volume_estimate(kt, n, seed.substream(2));
  const BodySampler sampler(kt);
  const SliceSampler slicer(*fam.body, fam.v, t);
  const std::size_t q = static_cast<std::size_t>(f.arity);
  const BatchSums sums = run_tuples(n, seed.substream(0), 1, [&](SampleStream& s, std::span<double> out) {
    Point pts[kMaxDim + 1];
    for (std::size_t i = 0; i < q; ++i) pts[i] = sampler.draw(s);
    const double free_value = f.eval(std::span<const Point>(pts, q));
    pts[0] = slicer.draw(s);
    out[0] = free_value - f.eval(std::span<const Point>(pts, q));
  });
  const MomentEstimate bracket = output_estimate(sums, 0, seed);
  const double qd = static_cast<double>(q);
  MomentEstimate e;
  e.mean = qd * bracket.mean * slice.mean / vol.mean;
  e.std_error = detail::product_stderr(qd, bracket, slice, vol);
  e.n = n;
  e.seed = seed;
  return e;
}

/// (d - E_{S_t} |X|^2) vol_{d-1}(S_t) / vol K_t, which is d/dt det A at t
/// when K_t is isotropic. Throws unless the estimated centroid and
/// covariance of K_t are within kIsotropyTolerance of 0 and I (max norm).
inline MomentEstimate detcov_derivative_rhs(const CutFamily& fam, double t, std::uint64_t n, Seed seed) {
  const ConvexBody kt = fam.at(t);
  const int d = kt.dim();
  const CovarianceEstimate cov = covariance_estimate(kt, n, seed.substream(3));
  double off = 0.0;
  for (int i = 0; i < d; ++i) {
    off = std::max(off, std::abs(cov.centroid[i]));
    for (int j = 0; j < d; ++j) off = std::max(off, std::abs(cov.matrix(i, j) - (i == j ? 1.0 : 0.0)));
  }
  if (off > kIsotropyTolerance)
    throw Error("K_t is not isotropic: max deviation " + std::to_string(off) + " > 0.05");
  const MomentEstimate slice = detail::slice_measure_at(fam, t, n, seed.substream(1));
  if (slice.mean == 0.0) return detail::exact_zero(n, seed);
  const MomentEstimate vol = volume_estimate(kt, n, seed.substream(2));
  const SliceSampler slicer(*fam.body, fam.v, t);
  const BatchSums sums = run_tuples(n, seed.substream(0), 1, [&](SampleStream& s, std::span<double> out) {
    out[0] = static_cast<double>(d) - norm2(slicer.draw(s));
  });
  const MomentEstimate bracket = output_estimate(sums, 0, seed);
  MomentEstimate e;
  e.mean = bracket.mean * slice.mean / vol.mean;
  e.std_error = detail::product_stderr(1.0, bracket, slice, vol);
  e.n = n;
  e.seed = seed;
  return e;
}

// ---------------------------------------------------------------------------
// Finite differences

using Statistic = std::function<MomentEstimate(const ConvexBody&, std::uint64_t, Seed)>;

inline Statistic expectation_statistic(SymmetricFunction f) {
  return [f = std::move(f)](const ConvexBody& b, std::uint64_t n, Seed s) { return expectation_estimate(b, f, n, s); };
}
inline Statistic det_cov_statistic() {
  return [](const ConvexBody& b, std::uint64_t n, Seed s) { return det_cov_estimate(b, n, s); };
}
inline Statistic volume_statistic() {
  return [](const ConvexBody& b, std::uint64_t n, Seed s) { return volume_estimate(b, n, s); };
}

/// (stat(K_{t+h}) - stat(K_t)) / h from independent substreams. With the
/// ">=" cut convention K_t shrinks as t grows, so volume has derivative
/// -vol_{d-1}(S_t).
inline MomentEstimate finite_difference(const CutFamily& fam, double t, double h, const Statistic& stat,
                                        std::uint64_t n, Seed seed) {
  require(h > 0.0, "finite difference step must be positive");
  require(t + h <= fam.b, "finite difference needs t + h <= b");
  const MomentEstimate lo = stat(fam.at(t), n, seed.substream(0));
  const MomentEstimate hi = stat(fam.at(t + h), n, seed.substream(1));
  MomentEstimate e;
  e.mean = (hi.mean - lo.mean) / h;
  e.std_error = combined_stderr(hi, lo) / h;
  e.n = n;
  e.seed = seed;
  return e;
}

struct RefinementStep {
  double h = 0.0;
  MomentEstimate fd;
};

struct RefinementReport {
  MomentEstimate rhs;
  std::vector<RefinementStep> steps;  // h, h/2, h/4

  /// Each halving moves the FD no further from the RHS, up to 3 combined sigma.
  bool monotone() const {
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
      const double e0 = std::abs(steps[i].fd.mean - rhs.mean);
      const double e1 = std::abs(steps[i + 1].fd.mean - rhs.mean);
      if (e1 > e0 + 3.0 * std::hypot(steps[i].fd.std_error, steps[i + 1].fd.std_error)) return false;
    }
    return true;
  }
};

inline RefinementReport h_refinement(const CutFamily& fam, double t, double h, const Statistic& stat,
                                     const MomentEstimate& rhs, std::uint64_t n, Seed seed) {
  RefinementReport r;
  r.rhs = rhs;
  for (int i = 0; i < 3; ++i) {
    const double hi = h / static_cast<double>(1 << i);
    r.steps.push_back({hi, finite_difference(fam, t, hi, stat, n, seed.substream(static_cast<std::uint64_t>(i)))});
  }
  return r;
}

/// RHS vs FD agreement: relative error <= rel_tol or |diff| <= sigmas
/// combined standard errors, whichever is looser.
inline bool derivative_agrees(const MomentEstimate& rhs, const MomentEstimate& fd, double rel_tol = 0.05,
                              double sigmas = 3.0) {
  const double diff = std::abs(rhs.mean - fd.mean);
  const double scale = std::max(std::abs(rhs.mean), std::abs(fd.mean));
  return diff <= rel_tol * scale || diff <= sigmas * combined_stderr(rhs, fd);
}

// ---------------------------------------------------------------------------
// Half-ball-with-cone counterexample

struct CounterexampleReport {
  int d = 0;
  double eps = 0.0;
  MomentEstimate full;    // E V_L
  MomentEstimate pinned;  // pinned moment of L at the apex
  MomentEstimate delta;   // full - pinned, paired
  double z() const { return delta.z(); }
};

/// Delta = E V_L - pinned(L, apex) for L = HalfBallCone(d, eps, 0), k = 1.
/// Delta > 0 means that truncating the tip strictly increases E V.
inline CounterexampleReport counterexample_derivative_test(int d, double eps, std::uint64_t n, Seed seed) {
  require(d >= 2 && d <= kMaxDim, "counterexample needs 2 <= d <= 8");
  require(eps > 0.0, "counterexample needs eps > 0");
  const ConvexBody l = make_half_ball_cone(d, eps, 0.0);
  const PairedMoments m = paired_moment_estimate(l, l.as<HalfBallCone>()->apex(), 1, n, seed);
  return {d, eps, m.full, m.pinned, m.difference};
}

}  // namespace geomprob
