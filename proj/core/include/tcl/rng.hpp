#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace tcl {

// All randomness in the project flows through this wrapper. std::mt19937_64
// output is pinned by the standard; the distribution helpers below are
// hand-rolled because the std distributions are implementation-defined and
// would break bytewise reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0, n); Lemire multiply-shift
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller; always consumes exactly two engine draws
  double gaussian() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// splitmix64 finalizer; used to derive independent seed streams
std::uint64_t mix_u64(std::uint64_t x);

// Derives a stream seed from a base seed plus a list of tags. Named streams
// (init, data, augment, shuffle, cluster, ...) hash their name through
// stream_tag so two streams never collide by accident.
std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

std::uint64_t stream_tag(std::string_view name);

}  // namespace tcl
