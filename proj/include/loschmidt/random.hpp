#pragma once

#include <cstdint>
#include <random>

namespace loschmidt {

// splitmix64 finalizer; the public mixing function behind all derived seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of ensemble member `index` under `master`. Independent of evaluation
// order, so parallel runs reproduce serial ones bit for bit.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ (index + 0x632be59bd9b4e019ULL));
}

// mt19937_64 output is fixed by the standard; the distributions below are
// computed by hand so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // standard normal via Box-Muller (pairs cached)
  double normal();
  std::uint64_t next_u64() { return engine_(); }
  // uniform integer on [0, n)
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace loschmidt
