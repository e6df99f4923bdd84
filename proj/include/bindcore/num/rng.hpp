#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace bindcore::num {

// Seedable stream with hand-rolled distributions so that identical seeds give
// identical sequences on every platform (std engines are portable, std
// distributions are not). Child streams derive from the parent seed alone, so
// split order never matters.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  double normal();                        // standard normal, Box-Muller
  int uniform_int(int n);                 // [0, n)

  Rng split(std::uint64_t salt) const;
  Rng split(std::string_view tag) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed = 0);

}  // namespace bindcore::num
