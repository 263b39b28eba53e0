#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ehlearn {

/// splitmix64 step; also used to mix seeds for per-(iteration, observable,
/// time) streams so parallel and serial execution draw identical numbers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    return splitmix64(s);
}

/// Small deterministic generator (xoshiro-free: iterated splitmix64) with
/// explicit uniform/normal conversions, so streams are identical across
/// standard-library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t integer() { return splitmix64(state_); }

    /// uniform in [0, 1)
    double uniform() { return (integer() >> 11) * 0x1.0p-53; }

    /// standard normal (Box-Muller, cached pair)
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        cache_ = r * std::sin(a);
        have_cache_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double cache_ = 0.0;
    bool have_cache_ = false;
};

}  // namespace ehlearn
