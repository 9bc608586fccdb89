#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ragtune {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed of the index-th independent substream of a master seed. Multi-seed
// runs and sweep cells derive their streams through this, so any single run
// is reproducible in isolation.
inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x51ed2701ull));
}

// Seeded random stream. Every draw is a pure function of the engine state
// (no cached spare like std::normal_distribution keeps), so serializing the
// engine captures the stream exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod n
    std::uint64_t v = engine_();
    while (v < threshold) v = engine_();
    return static_cast<std::size_t>(v % bound);
  }

  double gaussian(double mean = 0.0, double stddev = 1.0) {
    // Box-Muller without the spare value
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * mag * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::string save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (is.fail()) throw std::invalid_argument("RngStream: malformed engine state");
  }

  bool operator==(const RngStream& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ragtune
