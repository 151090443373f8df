#include "ermc/random.hpp"

namespace ermc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(const RngSpec& spec) {
  return splitmix64(splitmix64(spec.base_seed) ^ spec.stream_id);
}

RngSpec RngSpec::child(std::uint64_t sub) const {
  return RngSpec{derive_seed(*this), sub};
}

}  // namespace ermc
