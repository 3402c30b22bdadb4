#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace revip {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Counter-based random stream.
///
/// The i-th output is a pure function of (key, i), so a stream can be
/// reproduced from its key alone and child streams are derived by hashing
/// the parent key with a child index. Every stochastic routine in the
/// library takes a `Stream&` explicitly; nothing reads a global generator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : key_(detail::mix64(detail::mix64(seed) ^ (stream_id * detail::kGolden + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Deterministic child stream; does not advance this stream.
  [[nodiscard]] Stream split(std::uint64_t child) const noexcept {
    Stream s;
    s.key_ = detail::mix64(key_ ^ detail::mix64(child + 0xd1b54a32d192ed03ULL));
    return s;
  }

  /// Uniform on the open interval (0,1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method (second variate discarded).
  double normal() noexcept {
    for (;;) {
      const double a = 2.0 * uniform() - 1.0;
      const double b = 2.0 * uniform() - 1.0;
      const double s = a * a + b * b;
      if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

 private:
  Stream() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace revip
