#pragma once

#include <cstdint>
#include <random>

namespace matern4d {

/// splitmix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent purposes draw from disjoint stream families.
enum class StreamDomain : std::uint64_t {
  tn_model1 = 1,
  tn_model2 = 2,
  diagonal = 3,
  whittle = 4,
  validation = 5,
};

/// A seeded Gaussian random stream.
///
/// Streams are addressed by (master seed, domain, index), so replicate r always
/// sees the same numbers regardless of which worker runs it or in what order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  static RngStream derive(std::uint64_t master, StreamDomain domain, std::uint64_t index) {
    const std::uint64_t d = mix64(master ^ mix64(static_cast<std::uint64_t>(domain)));
    return RngStream(mix64(d + mix64(index)));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace matern4d
