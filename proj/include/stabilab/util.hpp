#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace stabilab {

using cd = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Deterministic RNG: splitmix64-seeded xoshiro-free mt19937_64 plus an
// explicit Box-Muller, so streams are reproducible bit for bit across
// standard libraries (std::normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cd cnormal() { return cd(normal(), normal()); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdull;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ull;
        return z ^ (z >> 33);
    }
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Trapezoid weights on n_t uniform nodes spanning [0, T].
inline std::vector<double> trapezoid_weights(int n_t, double T) {
    std::vector<double> w(n_t);
    const double dt = T / (n_t - 1);
    for (int j = 0; j < n_t; ++j) w[j] = dt;
    w.front() = 0.5 * dt;
    w.back() = 0.5 * dt;
    return w;
}

// Composite Simpson with an even panel count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Conjugate exponent: 1/r + 1/r' = 1, with 1 <-> inf.
inline double conjugate_exponent(double r) {
    if (std::isinf(r)) return 1.0;
    if (r == 1.0) return kInf;
    return r / (r - 1.0);
}

}  // namespace stabilab
