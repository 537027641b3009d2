#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace mrta {

// splitmix64 step, used to derive independent seed streams from a base seed
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base + (stream + 1) * 0x9e3779b97f4a7c15ull;
  return splitmix64(s);
}

// mt19937_64 with hand-rolled distributions so sequences are identical across
// standard libraries (std::uniform_* are not portable)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform double in [0, 1), 53 random bits
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive, unbiased via rejection
  long long uniform_int(long long lo, long long hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<long long>(eng_());  // full 64-bit range
    std::uint64_t limit = ~0ull - (~0ull % span);
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return lo + static_cast<long long>(v % span);
  }

  // standard normal, box-muller; a fresh pair per call, second value dropped,
  // which keeps the draw count predictable
  double normal() {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mrta
