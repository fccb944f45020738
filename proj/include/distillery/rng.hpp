#pragma once

#include <cmath>
#include <cstdint>

namespace distillery {

// Counter-based generator: every draw is a hash of (key, counter), so a
// stream can be split per work item and replayed independently of thread
// scheduling.  SplitMix64 finalizer underneath.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(hash(hash(seed, 0x8e1f52c1a5b3d0e7ull), stream)) {}

  static std::uint64_t hash(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + 0x9e3779b97f4a7c15ull * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return hash(key_, ctr_++); }

  // Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Independent child stream for work item `idx`; order of creation and of
  // consumption does not matter.
  Rng split(std::uint64_t idx) const {
    Rng child(0);
    child.key_ = hash(key_ ^ 0xd1b54a32d192ed03ull, idx);
    child.ctr_ = 0;
    child.have_spare_ = false;
    return child;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace distillery
