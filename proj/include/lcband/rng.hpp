#pragma once

// Counter-based random stream: output k of stream `key` is a fixed hash of
// (key, k), so any substream can be reproduced without replaying others.
// Satisfies UniformRandomBitGenerator for use with <random> distributions.

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace lcband {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Key for a substream identified by a path of integers below `root`.
inline std::uint64_t derive_key(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix64(root);
  for (auto p : path) k = mix64(k ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return k;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lcband
