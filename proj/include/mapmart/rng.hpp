#pragma once

#include <cmath>
#include <cstdint>

namespace mapmart {

// Counter-based splittable generator (splitmix64 core). Every (seed, path,
// stream) triple gets an independent stream, so the draw order inside one
// stream never depends on the mesh or on other streams. All distribution
// transforms are hand-rolled to keep output bit-identical across platforms.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : state_(key) {}

    // Stable 64-bit mixing of (seed, path, stream) into a stream key.
    static CounterRng derive(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
        std::uint64_t k = mix64(seed ^ 0x9E3779B97F4A7C15ULL);
        k = mix64(k ^ (path * 0xBF58476D1CE4E5B9ULL));
        k = mix64(k ^ (stream * 0x94D049BB133111EBULL));
        return CounterRng(k);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform on the open interval (0, 1); never exactly 0 or 1.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller with the spare value cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double next_exponential(double rate) {
        return -std::log(next_uniform()) / rate;
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Seed for path i of a batch rooted at base_seed.
inline std::uint64_t path_seed(std::uint64_t base_seed, std::uint64_t i) {
    std::uint64_t z = base_seed ^ (i + 0x9E3779B97F4A7C15ULL);
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

} // namespace mapmart
