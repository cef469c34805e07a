#pragma once

// Seeded, worker-count-independent Monte Carlo over phases.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lyap {

struct McOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Mean and standard error of a sample. Entries equal to -inf (zero
/// products) are counted; if any are present the mean is -inf.
struct SampleStats {
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t neg_inf = 0;
};

SampleStats summarize(std::span<const double> values);

/// values[i] = fn(i) for i < count. Indices are split into contiguous blocks,
/// one per worker; since every value is keyed by its index, the result is
/// bit-identical for any worker count. Exceptions from workers are rethrown.
std::vector<double> parallel_map(std::size_t count, unsigned workers,
                                 const std::function<double(std::size_t)>& fn);

/// Per-sample values for several quantities computed on the same phase.
/// Returns `width` columns, each of length `count`.
std::vector<std::vector<double>> parallel_map_multi(
    std::size_t count, unsigned workers, std::size_t width,
    const std::function<void(std::size_t, std::span<double>)>& fn);

}  // namespace lyap
