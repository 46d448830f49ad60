#include "mfchain/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "mfchain/types.hpp"

namespace mfchain {

unsigned default_thread_count() {
  if (const char* env = std::getenv("SOLVER_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t n, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
  if (workers == 1) {
    body(0, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = w * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleMoments sample_moments(std::span<const double> values) {
  SampleMoments m;
  m.count = values.size();
  if (values.empty()) return m;
  m.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return m;
  std::vector<double> sq(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    double d = values[k] - m.mean;
    sq[k] = d * d;
  }
  double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  m.standard_error = std::sqrt(var / static_cast<double>(values.size()));
  return m;
}

BlockAccumulator::BlockAccumulator(std::size_t n_items, std::size_t width)
    : blocks_((n_items + kBlockSize - 1) / kBlockSize), width_(width), data_(blocks_ * width, 0.0) {}

void BlockAccumulator::run(std::size_t n_items, unsigned threads,
                           const std::function<void(std::size_t, std::span<double>)>& fill) {
  parallel_chunks(blocks_, threads, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      auto row = block(b);
      std::size_t end = std::min(n_items, (b + 1) * kBlockSize);
      for (std::size_t item = b * kBlockSize; item < end; ++item) fill(item, row);
    }
  });
}

std::vector<double> BlockAccumulator::total() const {
  std::vector<double> out(width_, 0.0);
  std::vector<double> column(blocks_);
  for (std::size_t c = 0; c < width_; ++c) {
    for (std::size_t b = 0; b < blocks_; ++b) column[b] = data_[b * width_ + c];
    out[c] = pairwise_sum(column);
  }
  return out;
}

}  // namespace mfchain
