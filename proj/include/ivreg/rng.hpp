#ifndef IVREG_RNG_HPP_
#define IVREG_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "ivreg/errors.hpp"

namespace ivreg {

// Only the mt19937_64 bit stream is pinned by the standard, so the transforms
// are spelled out here (Box-Muller normals, Marsaglia-Tsang gammas) instead of
// using std::*_distribution; datasets stay byte-reproducible across toolchains.
inline constexpr const char* kRngName = "mt19937_64+boxmuller+marsaglia-tsang";

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Marsaglia-Tsang squeeze; shape < 1 boosted through Gamma(shape + 1).
    double gamma(double shape) {
        if (!(shape > 0.0)) throw DomainError("rng: gamma shape must be positive");
        if (shape < 1.0) {
            const double u = 1.0 - uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = 1.0 - uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    bool bernoulli(double prob) { return uniform01() < prob; }

  private:
    static constexpr double kPi = 3.14159265358979323846;

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ivreg

#endif  // IVREG_RNG_HPP_
