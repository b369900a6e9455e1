#pragma once

#include <cstdint>
#include <random>

namespace z2perc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream per (master seed, run index).  Runs in a parameter grid
// get their seeds from the same master seed without any coupling between
// streams, and the assignment does not depend on scheduling order.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t run_index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(run_index + 0x51ed2701ull));
}

// mt19937_64 engine with hand-rolled draw helpers.  std::uniform_*_distribution
// is implementation-defined, so going through it would make output depend on
// the standard library; these helpers keep runs byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // uniform double in [0, 1), 53 bits
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n), n >= 1 (Lemire multiply-shift; bias < 2^-64·n,
  // irrelevant at the sizes used here)
  std::uint64_t index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  bool coin() { return (eng_() >> 63) != 0; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace z2perc
