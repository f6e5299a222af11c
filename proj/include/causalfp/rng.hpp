#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "causalfp/errors.hpp"

namespace causalfp {

/// splitmix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Deterministic variate generator on top of mt19937_64. The standard
/// library's distribution objects are implementation-defined, so normal and
/// gamma variates are generated here explicitly: outputs depend only on the
/// seed, not on the standard library in use.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on (0, 1), 53-bit resolution, never exactly 0.
    double uniform() {
        while (true) {
            const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        while (true) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                const double m = std::sqrt(-2.0 * std::log(s) / s);
                spare_ = v * m;
                have_spare_ = true;
                return u * m;
            }
        }
    }

    /// Gamma(shape, scale) via Marsaglia-Tsang squeeze; requires shape >= 1.
    double gamma(double shape, double scale) {
        if (!(shape >= 1.0)) throw ValidationError("Rng::gamma: shape must be >= 1");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /// Chi-squared with (possibly non-integer) degrees of freedom nu > 2.
    double chi_squared(double nu) { return gamma(0.5 * nu, 2.0); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace causalfp
