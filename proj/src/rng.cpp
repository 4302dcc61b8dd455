#include "abcmc/core.hpp"

namespace abcmc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

RngStream::RngStream(std::uint64_t key) : engine_(splitmix64(key)) {}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t iteration,
                            std::uint64_t particle) {
  return RngStream(mix_seed(mix_seed(seed, iteration), particle));
}

double RngStream::uniform01() {
  // 53-bit mantissa, uniform on [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double RngStream::gaussian() {
  std::normal_distribution<double> dist;
  return dist(engine_);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

}  // namespace abcmc
