#include "curesurv/rng.hpp"

namespace curesurv {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = splitmix64(master) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 1);
  std::uint32_t words[8];
  for (auto& w : words) {
    s = splitmix64(s);
    w = static_cast<std::uint32_t>(s >> 32);
  }
  std::seed_seq seq(std::begin(words), std::end(words));
  return Rng(seq);
}

}  // namespace curesurv
