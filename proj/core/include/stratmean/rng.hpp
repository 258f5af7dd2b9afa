#pragma once

#include <cstdint>
#include <limits>

namespace stratmean {

// Counter-based stream: draw i of (seed, stream) is a pure function of the triple,
// so results never depend on scheduling.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t masterSeed, std::uint64_t streamIndex);

  std::uint64_t nextU64();
  double uniform();     // [0, 1)
  double uniformOpen(); // (0, 1)
  double normal();

  std::uint64_t masterSeed() const noexcept { return seed_; }
  std::uint64_t streamIndex() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return nextU64(); }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

} // namespace stratmean
