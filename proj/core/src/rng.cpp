#include "stratmean/rng.hpp"

#include <cmath>
#include <numbers>

namespace stratmean {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

RngStream::RngStream(std::uint64_t masterSeed, std::uint64_t streamIndex)
    : seed_(masterSeed), stream_(streamIndex) {
  key_ = mix64(mix64(masterSeed + kGolden) ^ mix64(streamIndex * 0xD1B54A32D192ED03ULL + 1));
}

std::uint64_t RngStream::nextU64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

double RngStream::uniformOpen() { return (static_cast<double>(nextU64() >> 11) + 0.5) * 0x1.0p-53; }

// Box-Muller written out so the stream is identical across standard libraries.
double RngStream::normal() {
  if (hasSpare_) {
    hasSpare_ = false;
    return spare_;
  }
  const double u1 = uniformOpen();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  hasSpare_ = true;
  return radius * std::cos(angle);
}

} // namespace stratmean
