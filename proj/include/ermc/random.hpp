#pragma once

#include <cstdint>
#include <random>

namespace ermc {

// A stream is identified by (base_seed, stream_id); the engine seed is a
// splitmix64 mix of both, so replication i never depends on who ran i-1.
struct RngSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;

  RngSpec child(std::uint64_t sub) const;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(const RngSpec& spec);

class Rng {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  explicit Rng(const RngSpec& spec) : seed_(derive_seed(spec)), engine_(seed_) {}
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double exponential(double rate = 1.0) { return std::exponential_distribution<double>(rate)(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

}  // namespace ermc
