#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfchain {

/// Worker count: SOLVER_THREADS when set to a positive integer, otherwise
/// std::thread::hardware_concurrency() (at least 1).
unsigned default_thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n) on `threads`
/// workers. The first exception thrown by any chunk is rethrown.
void parallel_chunks(std::size_t n, unsigned threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Recursive pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Sample mean and standard error of the mean (n >= 2).
struct SampleMoments {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};
SampleMoments sample_moments(std::span<const double> values);

/// Fixed-size blocks of paths whose partial sums are combined in block order,
/// making vector-valued Monte-Carlo accumulations independent of the thread
/// count. `width` is the length of the accumulated vector.
class BlockAccumulator {
 public:
  static constexpr std::size_t kBlockSize = 1024;

  BlockAccumulator(std::size_t n_items, std::size_t width);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t width() const noexcept { return width_; }
  std::span<double> block(std::size_t b) noexcept { return {data_.data() + b * width_, width_}; }

  /// Runs fill(item, row) for every item, block by block in parallel; each
  /// block's row is only touched by the thread owning that block.
  void run(std::size_t n_items, unsigned threads,
           const std::function<void(std::size_t item, std::span<double> row)>& fill);

  /// Pairwise reduction over blocks, component by component.
  std::vector<double> total() const;

 private:
  std::size_t blocks_;
  std::size_t width_;
  std::vector<double> data_;
};

}  // namespace mfchain
