#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace divtest {

// Counter-based random stream (Philox4x32-10).
//
// A stream is addressed by (seed, stream_id); the n-th output depends only on
// those two numbers and n, so work split across threads by stream id gives the
// same draws regardless of how many threads run it.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// One Philox4x32-10 block, exposed for tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

}  // namespace divtest
