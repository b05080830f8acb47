#pragma once

// Batch engine shared by every Monte Carlo estimator.
//
// n tuples are split into kBatches contiguous batches by index; tuple j
// draws from its own stream keyed by mix(seed, j). Batches may run on any
// number of worker threads, but sums are formed per batch in index order and
// combined in batch order, so results are bitwise identical to a serial run.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <thread>
#include <vector>

#include "geomprob/linalg.hpp"
#include "geomprob/random.hpp"

namespace geomprob {

inline constexpr int kBatches = 64;

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  int k = 1;
  Seed seed{};

  double z() const { return std_error > 0.0 ? mean / std_error : (mean == 0.0 ? 0.0 : HUGE_VAL * mean); }
};

/// Per-batch sums of `outputs` linear statistics.
struct BatchSums {
  int outputs = 0;
  std::vector<std::uint64_t> count;  // tuples per batch
  std::vector<double> sums;          // kBatches x outputs, row-major

  double sum(int batch, int out) const {
    return sums[static_cast<std::size_t>(batch * outputs + out)];
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : count) t += c;
    return t;
  }
  double grand_sum(int out) const {
    double s = 0.0;
    for (int b = 0; b < kBatches; ++b) s += sum(b, out);
    return s;
  }
};

/// Worker count: GEOMPROB_THREADS if set, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("GEOMPROB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Runs fn(stream, out) for tuples 0..n-1 and accumulates out[] per batch.
template <class TupleFn>
BatchSums run_tuples(std::uint64_t n, Seed seed, int outputs, TupleFn&& fn) {
  require(n >= static_cast<std::uint64_t>(kBatches), "need at least one tuple per batch");
  BatchSums r;
  r.outputs = outputs;
  r.count.assign(kBatches, 0);
  r.sums.assign(static_cast<std::size_t>(kBatches * outputs), 0.0);
  parallel_for(kBatches, [&](int b) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(b) / kBatches;
    const std::uint64_t hi = n * static_cast<std::uint64_t>(b + 1) / kBatches;
    std::vector<double> acc(static_cast<std::size_t>(outputs), 0.0);
    std::vector<double> out(static_cast<std::size_t>(outputs), 0.0);
    for (std::uint64_t j = lo; j < hi; ++j) {
      SampleStream stream(mix(seed.value, j));
      fn(stream, std::span<double>(out));
      for (int o = 0; o < outputs; ++o) acc[static_cast<std::size_t>(o)] += out[static_cast<std::size_t>(o)];
    }
    r.count[static_cast<std::size_t>(b)] = hi - lo;
    std::copy(acc.begin(), acc.end(), r.sums.begin() + static_cast<std::ptrdiff_t>(b * outputs));
  });
  return r;
}

/// Batch-means estimate of sum_o coeffs[o] * E out[o].
inline MomentEstimate linear_estimate(const BatchSums& s, std::span<const double> coeffs, Seed seed, int k = 1) {
  std::vector<double> means(kBatches);
  double total = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    double v = 0.0;
    for (int o = 0; o < s.outputs; ++o) v += coeffs[static_cast<std::size_t>(o)] * s.sum(b, o);
    total += v;
    means[static_cast<std::size_t>(b)] = v / static_cast<double>(s.count[static_cast<std::size_t>(b)]);
  }
  MomentEstimate e;
  e.n = s.total();
  e.mean = total / static_cast<double>(e.n);
  double ss = 0.0;
  for (double m : means) ss += (m - e.mean) * (m - e.mean);
  e.std_error = std::sqrt(ss / (kBatches - 1) / kBatches);
  e.k = k;
  e.seed = seed;
  return e;
}

inline MomentEstimate output_estimate(const BatchSums& s, int out, Seed seed, int k = 1) {
  std::vector<double> c(static_cast<std::size_t>(s.outputs), 0.0);
  c[static_cast<std::size_t>(out)] = 1.0;
  return linear_estimate(s, c, seed, k);
}

/// Delete-one-batch jackknife of a smooth function of the output means.
inline MomentEstimate jackknife_estimate(const BatchSums& s,
                                         const std::function<double(std::span<const double>)>& fn, Seed seed) {
  const int m = s.outputs;
  const double n = static_cast<double>(s.total());
  std::vector<double> grand(static_cast<std::size_t>(m));
  for (int o = 0; o < m; ++o) grand[static_cast<std::size_t>(o)] = s.grand_sum(o);
  std::vector<double> means(static_cast<std::size_t>(m));
  for (int o = 0; o < m; ++o) means[static_cast<std::size_t>(o)] = grand[static_cast<std::size_t>(o)] / n;
  MomentEstimate e;
  e.mean = fn(means);
  e.n = s.total();
  e.seed = seed;
  std::vector<double> loo(kBatches);
  double avg = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    const double nb = n - static_cast<double>(s.count[static_cast<std::size_t>(b)]);
    for (int o = 0; o < m; ++o)
      means[static_cast<std::size_t>(o)] = (grand[static_cast<std::size_t>(o)] - s.sum(b, o)) / nb;
    loo[static_cast<std::size_t>(b)] = fn(means);
    avg += loo[static_cast<std::size_t>(b)];
  }
  avg /= kBatches;
  double ss = 0.0;
  for (double v : loo) ss += (v - avg) * (v - avg);
  e.std_error = std::sqrt(ss * (kBatches - 1) / kBatches);
  return e;
}

/// Combined standard error of a - b for independent estimates.
inline double combined_stderr(const MomentEstimate& a, const MomentEstimate& b) {
  return std::hypot(a.std_error, b.std_error);
}

}  // namespace geomprob
