#ifndef MGK_RANDOM_HPP
#define MGK_RANDOM_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

namespace mgk {

/**
 * Portable seeded random source.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. The standard distributions are not portable, so sampling is done
 * here explicitly:
 *   uniform()   top 53 bits of one draw, scaled by 2^-53, in [0, 1)
 *   below(n)    rejection sampling: with M = 2^64 - 1, draws x until
 *               x < M - (M mod n), then returns x mod n
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mgk

#endif  // MGK_RANDOM_HPP
