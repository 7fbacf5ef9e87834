#ifndef NETSCAT_RNG_HPP
#define NETSCAT_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace netscat {

// SplitMix64 finalizer; used to hash (master seed, stream indices) into
// statistically independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the stream addressed by `path` under `master`. A realization's
// stream depends only on its own indices, never on how many other streams
// were drawn.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0 || u >= 1.0);
    return u;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netscat

#endif  // NETSCAT_RNG_HPP
