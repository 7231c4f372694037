#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "symbols.hpp"
#include "util.hpp"

namespace stabilab {

// Uniform periodic lattice on the torus [0, ell)^d, n cells per axis.
// p is the default Lebesgue exponent carried with the geometry.
struct GridSpec {
    int d = 1;
    int n = 64;
    double ell = 1.0;
    double p = 2.0;

    long total() const {
        long t = 1;
        for (int i = 0; i < d; ++i) t *= n;
        return t;
    }
    double spacing() const { return ell / n; }
    double cell_measure() const { return std::pow(spacing(), d); }
    double nyquist() const { return M_PI * n / ell; }
    // largest Euclidean |xi| attained by any lattice frequency
    double max_freq_norm() const { return std::sqrt(static_cast<double>(d)) * nyquist(); }
};

inline GridSpec make_grid(int d, int n, double ell, double p = 2.0) {
    if (d < 1 || d > 3) throw PreconditionError("grid dimension must be 1, 2 or 3");
    if (!fft::is_pow2(n)) throw PreconditionError("grid extent n must be a power of two");
    if (!(ell > 0.0)) throw PreconditionError("grid period ell must be positive");
    if (!(p >= 1.0)) throw PreconditionError("norm exponent p must satisfy p >= 1");
    return GridSpec{d, n, ell, p};
}

inline bool same_geometry(const GridSpec& a, const GridSpec& b) {
    return a.d == b.d && a.n == b.n && a.ell == b.ell;
}

// Signed frequency index for FFT bin j on one axis: 0..n/2-1, then -n/2..-1.
inline int signed_index(int j, int n) { return j < n / 2 ? j : j - n; }

struct StateVector {
    GridSpec grid;
    std::vector<cd> v;
};

inline StateVector zero_state(const GridSpec& g) { return {g, std::vector<cd>(g.total())}; }

inline StateVector random_normal_state(const GridSpec& g, Rng& rng) {
    StateVector s = zero_state(g);
    for (auto& x : s.v) x = rng.cnormal();
    return s;
}

// Decode flat row-major index into per-axis bin indices.
inline std::array<int, 3> axis_indices(long flat, const GridSpec& g) {
    std::array<int, 3> ix{0, 0, 0};
    for (int a = g.d - 1; a >= 0; --a) {
        ix[a] = static_cast<int>(flat % g.n);
        flat /= g.n;
    }
    return ix;
}

// Spatial node of cell j: x = j * h per axis.
inline std::vector<double> grid_point(long flat, const GridSpec& g) {
    const auto ix = axis_indices(flat, g);
    std::vector<double> x(g.d);
    for (int a = 0; a < g.d; ++a) x[a] = ix[a] * g.spacing();
    return x;
}

// Frequency xi_k = 2*pi*k/ell per axis, k in {-n/2,...,n/2-1}.
inline std::vector<double> frequency(long flat, const GridSpec& g) {
    const auto ix = axis_indices(flat, g);
    std::vector<double> xi(g.d);
    for (int a = 0; a < g.d; ++a) xi[a] = 2.0 * M_PI * signed_index(ix[a], g.n) / g.ell;
    return xi;
}

inline double frequency_norm(long flat, const GridSpec& g) {
    const auto ix = axis_indices(flat, g);
    double s = 0.0;
    for (int a = 0; a < g.d; ++a) {
        const double xi = 2.0 * M_PI * signed_index(ix[a], g.n) / g.ell;
        s += xi * xi;
    }
    return std::sqrt(s);
}

// max_i |xi_i|, the box radius of the bin
inline double frequency_box_radius(long flat, const GridSpec& g) {
    const auto ix = axis_indices(flat, g);
    double m = 0.0;
    for (int a = 0; a < g.d; ++a)
        m = std::max(m, std::abs(2.0 * M_PI * signed_index(ix[a], g.n) / g.ell));
    return m;
}

inline std::vector<std::vector<double>> grid_frequencies(const GridSpec& g) {
    std::vector<std::vector<double>> out;
    out.reserve(g.total());
    for (long j = 0; j < g.total(); ++j) out.push_back(frequency(j, g));
    return out;
}

// Forward transform with the continuum normalization (ell/n)^d * sum, so a
// constant 1 lands at ell^d in the zero bin and bin values approximate the
// integral transform of the sampled function.
inline std::vector<cd> dft(const StateVector& s) {
    std::vector<cd> spec = s.v;
    fft::transform_nd(spec, s.grid.d, s.grid.n, false);
    const double scale = s.grid.cell_measure();
    for (auto& z : spec) z *= scale;
    return spec;
}

inline StateVector idft(std::vector<cd> spec, const GridSpec& g) {
    fft::transform_nd(spec, g.d, g.n, true);
    const double scale = std::pow(g.ell, -g.d);
    for (auto& z : spec) z *= scale;
    return {g, std::move(spec)};
}

inline double lp_norm(const StateVector& s, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (const cd& z : s.v) m = std::max(m, std::abs(z));
        return m;
    }
    double acc = 0.0;
    for (const cd& z : s.v) acc += std::pow(std::abs(z), p);
    return std::pow(s.grid.cell_measure() * acc, 1.0 / p);
}

inline double lp_norm(const StateVector& s) { return lp_norm(s, s.grid.p); }

// Weighted l2 inner product matching lp_norm(.,2); conjugates the first slot.
inline cd dot_l2(const StateVector& a, const StateVector& b) {
    cd acc = 0.0;
    for (long j = 0; j < static_cast<long>(a.v.size()); ++j) acc += std::conj(a.v[j]) * b.v[j];
    return acc * a.grid.cell_measure();
}

// Smooth cutoff profile: 1 on [0,1/2], 0 on [1,inf), C^inf glue between via
// phi(t) = exp(-1/t).
inline double cutoff_eta(double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const auto phi = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    const double up = phi(2.0 - 2.0 * r);
    return up / (up + phi(2.0 * r - 1.0));
}

inline double cutoff_chi(double xi_norm, double lambda) { return cutoff_eta(xi_norm / lambda); }

// Symbol values a_{s,b}(xi_k) over all bins, FFT storage order.
inline std::vector<cd> symbol_on_grid(const FractionalSymbol& sym, const GridSpec& g) {
    std::vector<cd> vals(g.total());
    for (long j = 0; j < g.total(); ++j) vals[j] = sym.evaluate(frequency(j, g));
    return vals;
}

// Diagonal Fourier multiplier: state -> idft(mult .* dft(state)).
inline StateVector apply_multiplier(const StateVector& s, const std::vector<cd>& mult) {
    std::vector<cd> spec = dft(s);
    for (long j = 0; j < static_cast<long>(spec.size()); ++j) spec[j] *= mult[j];
    return idft(std::move(spec), s.grid);
}

inline void check_certificate_covers_grid(const FractionalSymbol& sym, const GridSpec& g) {
    if (!sym.cert.validated)
        throw PreconditionError("semigroup requires a validated ellipticity certificate");
    if (sym.cert.xi_max + 1e-9 * (1.0 + g.max_freq_norm()) < g.max_freq_norm())
        throw PreconditionError("ellipticity certificate does not cover the grid frequencies");
}

inline std::vector<cd> semigroup_multiplier(const std::vector<cd>& symbol_vals, double t) {
    std::vector<cd> m(symbol_vals.size());
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = std::exp(-t * symbol_vals[j]);
    return m;
}

// e^{-t A} f realized as the multiplier exp(-t a_{s,b}(xi_k)).
inline StateVector semigroup_apply(const FractionalSymbol& sym, double t, const StateVector& s) {
    if (t < 0.0) throw PreconditionError("semigroup time must be nonnegative");
    if (t == 0.0) return s;
    check_certificate_covers_grid(sym, s.grid);
    return apply_multiplier(s, semigroup_multiplier(symbol_on_grid(sym, s.grid), t));
}

// Smooth low-pass at scale lambda: bins scaled by eta(|xi|/lambda).
inline StateVector spectral_projection(double lambda, const StateVector& s) {
    if (!(lambda > 0.0)) throw PreconditionError("projection scale lambda must be positive");
    if (lambda > s.grid.nyquist() * (1.0 + 1e-12))
        throw PreconditionError("projection scale exceeds the grid Nyquist frequency");
    std::vector<cd> spec = dft(s);
    for (long j = 0; j < static_cast<long>(spec.size()); ++j)
        spec[j] *= cutoff_chi(frequency_norm(j, s.grid), lambda);
    return idft(std::move(spec), s.grid);
}

// Sharp box band-limit: keep bins with max_i |xi_i| <= lambda.
inline StateVector band_limit_sharp(double lambda, const StateVector& s) {
    if (!(lambda > 0.0)) throw PreconditionError("band limit lambda must be positive");
    std::vector<cd> spec = dft(s);
    for (long j = 0; j < static_cast<long>(spec.size()); ++j)
        if (frequency_box_radius(j, s.grid) > lambda) spec[j] = 0.0;
    return idft(std::move(spec), s.grid);
}

// ---- persistence ----------------------------------------------------------
// Binary layout: uint32 d, uint32 n, float64 ell, float64 p, then n^d
// complex values as interleaved re/im float64, row-major.  Little-endian.

inline void save_state(const StateVector& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot open " + path + " for writing");
    const std::uint32_t d = s.grid.d, n = s.grid.n;
    f.write(reinterpret_cast<const char*>(&d), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&s.grid.ell), 8);
    f.write(reinterpret_cast<const char*>(&s.grid.p), 8);
    for (const cd& z : s.v) {
        const double re = z.real(), im = z.imag();
        f.write(reinterpret_cast<const char*>(&re), 8);
        f.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!f) throw PreconditionError("short write to " + path);
}

inline StateVector load_state(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw PreconditionError("cannot open " + path);
    std::uint32_t d = 0, n = 0;
    double ell = 0.0, p = 0.0;
    f.read(reinterpret_cast<char*>(&d), 4);
    f.read(reinterpret_cast<char*>(&n), 4);
    f.read(reinterpret_cast<char*>(&ell), 8);
    f.read(reinterpret_cast<char*>(&p), 8);
    if (!f) throw PreconditionError("truncated state header in " + path);
    const GridSpec g = make_grid(static_cast<int>(d), static_cast<int>(n), ell, p);
    StateVector s = zero_state(g);
    for (cd& z : s.v) {
        double re = 0.0, im = 0.0;
        f.read(reinterpret_cast<char*>(&re), 8);
        f.read(reinterpret_cast<char*>(&im), 8);
        z = cd(re, im);
    }
    if (!f) throw PreconditionError("truncated state payload in " + path);
    return s;
}

}  // namespace stabilab
