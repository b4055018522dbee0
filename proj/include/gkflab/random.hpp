#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace gkflab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`; a pure function of both, so results
/// never depend on which worker ran which stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(derive_seed(master, index));
}

// Marsaglia polar method, written out so draws do not depend on the standard
// library's distribution implementation.
class NormalSource {
 public:
  double operator()(Rng& rng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = unit(rng) * 2.0 - 1.0;
      v = unit(rng) * 2.0 - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  static double unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gkflab
