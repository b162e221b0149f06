#pragma once

#include <cstdint>

namespace framemap {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based generator keyed by (seed, stream). Every sample index gets
/// its own stream, so results do not depend on how samples are partitioned
/// across workers.
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : key_(detail::mix64(detail::mix64(seed) ^ detail::mix64(stream * 0xd1342543de82ef95ULL + 1))) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (-1, 1); resamples the (measure-zero) exact 0 so callers can
  /// rely on nonzero coordinates.
  double symmetric() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      if (u != 0.0) return u;
    }
  }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace framemap
