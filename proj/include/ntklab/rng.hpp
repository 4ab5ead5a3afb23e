#pragma once

// Counter-based random streams.
//
// Every random quantity in the lab is drawn from a stream identified by
// (master seed, label). The stream key is a hash of both, and the n-th draw is
// a SplitMix64 finalization of key + n * golden. Streams with distinct labels
// are therefore independent of how many values any other stream consumed.
//
// Seed derivation for a sweep run is stable across versions:
//   run_seed(master, S, m, rep) = mix(mix(mix(mix(master) ^ S) ^ m) ^ rep)
// where mix is the SplitMix64 finalizer.

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace ntklab {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// FNV-1a over the label bytes.
constexpr std::uint64_t label_hash(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t stream_key(std::uint64_t master, std::string_view label) {
  return mix64(mix64(master + kGolden) ^ label_hash(label));
}

constexpr std::uint64_t run_seed(std::uint64_t master, std::uint64_t s, std::uint64_t m,
                                 std::uint64_t rep) {
  return mix64(mix64(mix64(mix64(master) ^ s) ^ m) ^ rep);
}

/// UniformRandomBitGenerator over a (key, counter) pair.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t master, std::string_view label) : key_(stream_key(master, label)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + kGolden * ++counter_); }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Standard normal draws from a counter stream.
class GaussianStream {
 public:
  explicit GaussianStream(CounterRng rng) : rng_(rng) {}
  GaussianStream(std::uint64_t master, std::string_view label) : rng_(master, label) {}

  double operator()() { return dist_(rng_); }
  CounterRng& engine() { return rng_; }

 private:
  CounterRng rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace ntklab
