#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace graphdissect {

// Deterministic RNG. All randomness in the toolkit flows from one user seed
// through named substreams, so artifacts are byte-stable across runs and
// platforms (mt19937_64 output is standardized; distributions are hand-rolled
// because the std:: ones are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = next_u64() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream_name);

inline Rng substream(std::uint64_t seed, std::string_view stream_name) {
  return Rng(mix_seed(seed, stream_name));
}

}  // namespace graphdissect
