#pragma once

#include <cstdint>
#include <limits>

namespace rmpc {

/// Identifies one sampling round: experiment seed, control step and
/// iteration inside that step. Each candidate draws from its own stream
/// derived from the key and its index, so results do not depend on which
/// thread produced them or in what order.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t iteration = 0;
};

/// Which consumer a stream belongs to, so that e.g. the Gumbel keys used for
/// selection never reuse the Gaussian noise of the same candidate.
enum class StreamPurpose : std::uint64_t {
  kCandidate = 1,
  kSelection = 2,
  kEpisode = 3,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based engine: output k is splitmix64(base + k). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit CounterEngine(std::uint64_t base) : base_(base) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return splitmix64(base_ + 0x632be59bd9b4e019ULL * ++counter_); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

inline CounterEngine stream_for(const StreamKey& key, std::uint64_t index, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.step);
  h = splitmix64(h ^ key.iteration);
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return CounterEngine(h);
}

}  // namespace rmpc
