#include "lyap/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lyap/errors.hpp"

namespace lyap {

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.samples = values.size();
  if (values.empty()) throw InvalidInput("cannot summarize an empty sample");
  double sum = 0.0;
  std::size_t finite = 0;
  for (double v : values) {
    if (v == -std::numeric_limits<double>::infinity()) {
      ++s.neg_inf;
      continue;
    }
    sum += v;
    ++finite;
  }
  if (s.neg_inf > 0) {
    s.mean = -std::numeric_limits<double>::infinity();
    return s;
  }
  s.mean = sum / static_cast<double>(finite);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.std_error = s.stddev / std::sqrt(static_cast<double>(values.size()));
  return s;
}

namespace {

template <class Body>
void run_blocks(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  const std::size_t nthreads = std::min<std::size_t>(workers, std::max<std::size_t>(count, 1));
  if (nthreads <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> threads;
  threads.reserve(nthreads);
  const std::size_t block = (count + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t lo = t * block;
    const std::size_t hi = std::min(count, lo + block);
    if (lo >= hi) break;
    threads.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  threads.clear();  // joins
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<double> parallel_map(std::size_t count, unsigned workers,
                                 const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(count);
  run_blocks(count, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
  });
  return out;
}

std::vector<std::vector<double>> parallel_map_multi(
    std::size_t count, unsigned workers, std::size_t width,
    const std::function<void(std::size_t, std::span<double>)>& fn) {
  std::vector<double> flat(count * width);
  run_blocks(count, workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) fn(i, std::span<double>(flat.data() + i * width, width));
  });
  std::vector<std::vector<double>> cols(width, std::vector<double>(count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < width; ++c) cols[c][i] = flat[i * width + c];
  return cols;
}

}  // namespace lyap
