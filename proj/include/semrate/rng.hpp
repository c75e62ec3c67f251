#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace semrate {

// SplitMix64 finalizer. Used to turn structured seed tuples into
// well-separated 64-bit engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds an ordered tuple of integers into one seed. Order matters, so
// (1, 2) and (2, 1) give different streams.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(master);
  for (auto p : parts) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream identifiers inside one simulation run.
enum class StreamId : std::uint64_t { Arrivals = 1, Errors = 2 };

/// Random stream with a portable uniform/exponential mapping.
///
/// std::uniform_real_distribution and friends are implementation-defined,
/// so the mapping from engine output to doubles is done here to keep runs
/// bit-identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}
  RandomStream(std::uint64_t run_seed, StreamId id)
      : RandomStream(derive_seed(run_seed, {static_cast<std::uint64_t>(id)})) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate; 1 - u lies in (0, 1] so the log is finite.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace semrate
