#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "thickset.hpp"
#include "util.hpp"

namespace stabilab {

inline std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = a + (b - a) * i / (count - 1);
    return t;
}

// ---- uncertainty ----------------------------------------------------------

struct UncertaintyEstimate {
    double lambda = 0.0;
    double p = 2.0;
    double c1_hat = 0.0;    // infinity when the set fails the estimate at this scale
    int trials = 0;
    std::string method;     // "power-iteration" (sharp, p=2) or "random-max" (lower bound)
};

namespace detail {

// Sharp best constant for p=2 via the top eigenvalue mu of B 1_{E^c} B with
// B the sharp box band-limit: every band-limited f obeys
// ||f||^2 = ||1_E f||^2 + <f, B 1_{E^c} B f> <= ||1_E f||^2 + mu ||f||^2,
// so c1 = (1 - mu)^{-1/2}.  Iterations run on spectrum coefficients, where
// the weighted l2 inner product is a uniform one and both projections are
// orthogonal.
inline double band_leakage_mu(const ThickSet& set, double lambda, int restarts,
                              std::uint64_t seed, int max_iters = 50000) {
    const GridSpec& g = set.grid;
    std::vector<std::uint8_t> in_band(g.total());
    long band_count = 0;
    for (long j = 0; j < g.total(); ++j) {
        in_band[j] = frequency_box_radius(j, g) <= lambda ? 1 : 0;
        band_count += in_band[j];
    }
    if (band_count == 0) return 0.0;

    const auto apply = [&](const std::vector<cd>& spec) {
        StateVector x = idft(spec, g);
        for (long j = 0; j < g.total(); ++j)
            if (set.mask[j]) x.v[j] = 0.0;   // keep the complement
        std::vector<cd> out = dft(x);
        for (long j = 0; j < g.total(); ++j)
            if (!in_band[j]) out[j] = 0.0;
        return out;
    };

    double best = 0.0;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(seed, 1000 + r);
        std::vector<cd> f(g.total(), cd(0.0));
        for (long j = 0; j < g.total(); ++j)
            if (in_band[j]) f[j] = rng.cnormal();
        double nf = 0.0;
        for (const cd& z : f) nf += std::norm(z);
        nf = std::sqrt(nf);
        if (nf == 0.0) continue;
        for (cd& z : f) z /= nf;

        double mu = 0.0;
        int hits = 0;
        for (int it = 0; it < max_iters; ++it) {
            std::vector<cd> h = apply(f);
            double rayleigh = 0.0, nh = 0.0;
            for (long j = 0; j < g.total(); ++j) {
                rayleigh += (std::conj(f[j]) * h[j]).real();
                nh += std::norm(h[j]);
            }
            nh = std::sqrt(nh);
            const bool settled = std::abs(rayleigh - mu) <= 1e-8 * std::max(1.0, rayleigh);
            mu = rayleigh;
            if (settled && ++hits >= 2) break;
            if (!settled) hits = 0;
            if (nh == 0.0) break;
            for (long j = 0; j < g.total(); ++j) f[j] = h[j] / nh;
        }
        best = std::max(best, mu);
    }
    return std::min(best, 1.0);
}

}  // namespace detail

// Smallest constant with ||f||_p <= c1 ||f||_{L_p(E)} for band-limited f.
// p=2 is computed sharply by power iteration; other p report an empirical
// lower bound from random band-limited draws.
inline UncertaintyEstimate estimate_uncertainty(const ThickSet& set, double lambda, double p,
                                                int trials, std::uint64_t seed = 1) {
    if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
    if (lambda > set.grid.nyquist() * (1.0 + 1e-12))
        throw PreconditionError("lambda exceeds the grid Nyquist frequency");
    UncertaintyEstimate est;
    est.lambda = lambda;
    est.p = p;
    est.trials = trials;
    if (p == 2.0) {
        est.method = "power-iteration";
        // dimension count: more band coefficients than active cells forces a
        // band function supported on the complement, so no constant exists
        long band_count = 0, cell_count = 0;
        for (long j = 0; j < set.grid.total(); ++j) {
            band_count += frequency_box_radius(j, set.grid) <= lambda ? 1 : 0;
            cell_count += set.mask[j] ? 1 : 0;
        }
        if (band_count > cell_count) {
            est.c1_hat = kInf;
            return est;
        }
        const double mu = detail::band_leakage_mu(set, lambda, 2, seed);
        est.c1_hat = (1.0 - mu <= 1e-14) ? kInf : 1.0 / std::sqrt(1.0 - mu);
        return est;
    }
    est.method = "random-max";
    double worst = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
        Rng rng(seed, 2000 + tr);
        StateVector f = band_limit_sharp(lambda, random_normal_state(set.grid, rng));
        const double num = lp_norm(f, p);
        if (num == 0.0) continue;
        const double den = lp_norm(restrict_state(f, set), p);
        if (den == 0.0) {
            worst = kInf;
            break;
        }
        worst = std::max(worst, num / den);
    }
    est.c1_hat = worst;
    return est;
}

struct UncertaintyFit {
    double d0 = 1.0;
    double d1 = 0.0;
    std::vector<UncertaintyEstimate> points;
};

// Exponential majorant c1_hat(lambda) <= d0 * exp(d1 * lambda): least-squares
// slope in log space, intercept raised until no sample sits above the fit.
inline UncertaintyFit fit_uncertainty_growth(const ThickSet& set,
                                             const std::vector<double>& lambdas, double p,
                                             int trials, std::uint64_t seed = 1) {
    if (lambdas.size() < 2) throw PreconditionError("need at least two lambda values to fit");
    UncertaintyFit fit;
    std::vector<double> lx, ly;
    for (double lam : lambdas) {
        auto est = estimate_uncertainty(set, lam, p, trials, seed);
        if (std::isinf(est.c1_hat))
            throw PreconditionError("uncertainty constant is infinite at lambda=" +
                                    std::to_string(lam) + "; shrink the sweep");
        fit.points.push_back(est);
        lx.push_back(lam);
        ly.push_back(std::log(est.c1_hat));
    }
    const auto npts = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = npts * sxx - sx * sx;
    double slope = denom > 0.0 ? (npts * sxy - sx * sy) / denom : 0.0;
    fit.d1 = std::max(slope, 1e-9);
    double logd0 = -kInf;
    for (std::size_t i = 0; i < lx.size(); ++i) logd0 = std::max(logd0, ly[i] - fit.d1 * lx[i]);
    fit.d0 = std::exp(logd0);
    return fit;
}

// ---- dissipation ----------------------------------------------------------

struct DissipationSample {
    double t = 0.0;
    double measured = 0.0;
};

struct DissipationEstimate {
    double lambda = 0.0;
    double p = 2.0;
    double K = 0.0;                 // smallest constant covering the samples
    double rate = 0.0;              // decay exponent 2^{-s m - 4} c^s lambda^{s m}
    double lambda_threshold = 0.0;  // admissibility floor for lambda
    std::vector<DissipationSample> samples;
};

inline double dissipation_lambda_threshold(const FractionalSymbol& sym) {
    if (std::isnan(sym.nu)) throw PreconditionError("compute_nu has not been run on this symbol");
    const double sm = sym.power();
    const double nu_plus = std::max(sym.nu, 0.0);
    const double cs = std::pow(sym.cert.c, sym.s);
    return std::pow(std::pow(2.0, sm + 4.0) * nu_plus / cs, 1.0 / sm);
}

// Measures ||(I - P_lambda) S_t|| on the grid against K e^{-rate t}.  p=2 is
// the exact multiplier norm; other p use the L1 kernel bound, which majorizes
// every L_p operator norm.
inline DissipationEstimate verify_dissipation(const FractionalSymbol& sym, const GridSpec& grid,
                                              double lambda, const std::vector<double>& t_samples,
                                              double p) {
    DissipationEstimate est;
    est.lambda = lambda;
    est.p = p;
    est.lambda_threshold = dissipation_lambda_threshold(sym);
    if (!(lambda > est.lambda_threshold))
        throw PreconditionError("lambda=" + std::to_string(lambda) +
                                " is not above the dissipation threshold " +
                                std::to_string(est.lambda_threshold));
    if (lambda > grid.nyquist() * (1.0 + 1e-12))
        throw PreconditionError("lambda exceeds the grid Nyquist frequency");
    if (t_samples.empty()) throw PreconditionError("empty time sample set");
    check_certificate_covers_grid(sym, grid);

    const double sm = sym.power();
    est.rate = std::pow(2.0, -sm - 4.0) * std::pow(sym.cert.c, sym.s) * std::pow(lambda, sm);
    const std::vector<cd> avals = symbol_on_grid(sym, grid);
    std::vector<double> hipass(grid.total());
    for (long j = 0; j < grid.total(); ++j)
        hipass[j] = 1.0 - cutoff_chi(frequency_norm(j, grid), lambda);

    for (double t : t_samples) {
        if (t < 0.0) throw PreconditionError("time samples must be nonnegative");
        double measured = 0.0;
        if (p == 2.0) {
            for (long j = 0; j < grid.total(); ++j)
                measured = std::max(measured, hipass[j] * std::exp(-t * avals[j].real()));
        } else {
            std::vector<cd> mult(grid.total());
            for (long j = 0; j < grid.total(); ++j)
                mult[j] = hipass[j] * std::exp(-t * avals[j]);
            StateVector kernel = idft(std::move(mult), grid);
            for (const cd& z : kernel.v) measured += std::abs(z);
            measured *= grid.cell_measure();
        }
        est.samples.push_back({t, measured});
        est.K = std::max(est.K, measured * std::exp(est.rate * t));
    }
    return est;
}

// ---- semigroup growth -----------------------------------------------------

struct GrowthBound {
    double M = 1.0;
    double omega = 0.0;  // ||S_t|| <= M e^{omega t} on the sampled times
};

inline GrowthBound semigroup_growth_bound(const FractionalSymbol& sym, const GridSpec& grid,
                                          double p, const std::vector<double>& t_samples) {
    check_certificate_covers_grid(sym, grid);
    const std::vector<cd> avals = symbol_on_grid(sym, grid);
    double min_re = kInf;
    for (const cd& a : avals) min_re = std::min(min_re, a.real());
    GrowthBound gb;
    gb.omega = -min_re;  // exact exponential type of the grid semigroup
    if (p == 2.0) {
        gb.M = 1.0;      // multiplier norm is e^{omega t} exactly
        return gb;
    }
    if (t_samples.empty()) throw PreconditionError("empty time sample set");
    gb.M = 1.0;
    for (double t : t_samples) {
        std::vector<cd> mult(grid.total());
        for (long j = 0; j < grid.total(); ++j) mult[j] = std::exp(-t * avals[j]);
        StateVector kernel = idft(std::move(mult), grid);
        double l1 = 0.0;
        for (const cd& z : kernel.v) l1 += std::abs(z);
        l1 *= grid.cell_measure();
        gb.M = std::max(gb.M, l1 * std::exp(-gb.omega * t));
    }
    return gb;
}

// ---- observability constants ----------------------------------------------

struct ObsConstants {
    double C_obs = 0.0;
    double alpha = 0.0;
    bool quadrature_converged = true;
};

namespace detail {

inline double simpson_with_check(const std::function<double(double)>& f, double a, double b,
                                 bool* converged) {
    const double fine = simpson(f, a, b, 1024);
    const double coarse = simpson(f, a, b, 512);
    if (converged && std::abs(fine - coarse) > 1e-6 * std::max(1.0, std::abs(fine)))
        *converged = false;
    return fine;
}

}  // namespace detail

// Constants of the weak observation inequality
//   ||S_T x|| <= C_obs (int_0^T ||C S_t x||^r dt)^{1/r} + alpha ||x||
// from an uncertainty profile c1(t), a decay profile c2(t) for the projection
// remainder, and the growth envelope M e^{omega t}.
inline ObsConstants observability_constants(const std::function<double(double)>& c1_profile,
                                            const std::function<double(double)>& c2_profile,
                                            double M, double omega, double T, double r,
                                            double delta, double norm_C) {
    if (!(T > 0.0)) throw PreconditionError("T must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0,1)");
    if (!(r >= 1.0)) throw PreconditionError("r must satisfy r >= 1");
    const double omega_plus = std::max(omega, 0.0);
    const double front = M * std::exp(omega_plus * T);

    double max_c1 = 0.0;
    for (double t : linspace(delta * T, T, 1024)) max_c1 = std::max(max_c1, c1_profile(t));

    const double t_pow = std::isinf(r) ? 1.0 : std::pow(T, 1.0 / r);
    ObsConstants out;
    out.C_obs = front / ((1.0 - delta) * t_pow) * max_c1;
    const auto integrand = [&](double t) {
        return (c1_profile(t) * norm_C + 1.0) * c2_profile(t);
    };
    const double integral =
        detail::simpson_with_check(integrand, delta * T, T, &out.quadrature_converged);
    out.alpha = front / ((1.0 - delta) * T) * integral;
    return out;
}

// Variant splitting the observation window at a fixed T0 <= T with a constant
// uncertainty bound; the time-shift argument costs a factor 2^{1-1/r} (1 when
// r = infinity).
inline ObsConstants observability_constants_T0(double C1, const std::function<double(double)>& c2_profile,
                                               double M, double omega, double T, double T0,
                                               double r, double norm_C) {
    if (!(T > 0.0) || !(T0 > 0.0) || T0 > T)
        throw PreconditionError("need 0 < T0 <= T");
    if (!(r >= 1.0)) throw PreconditionError("r must satisfy r >= 1");
    const double omega_plus = std::max(omega, 0.0);
    const double front = M * std::exp(omega_plus * T);
    const double factor = std::isinf(r) ? 1.0 : std::pow(2.0, 1.0 - 1.0 / r);

    ObsConstants out;
    out.C_obs = front * factor * C1;
    double c2_r_norm;
    if (std::isinf(r)) {
        c2_r_norm = 0.0;
        for (double t : linspace(0.0, T0, 1025)) c2_r_norm = std::max(c2_r_norm, c2_profile(t));
    } else {
        const auto integrand = [&](double t) { return std::pow(c2_profile(t), r); };
        c2_r_norm = std::pow(
            detail::simpson_with_check(integrand, 0.0, T0, &out.quadrature_converged), 1.0 / r);
    }
    out.alpha = front * (factor * C1 * norm_C * c2_r_norm + c2_profile(T0));
    return out;
}

// Pure-exponential specialization: c1 constant, c2(t) = M_P e^{-omega_P t},
// window split at delta* = (omega_P + omega_plus) / (2 omega_P); the sup
// bound of the integral collapses to a single decaying exponential in T.
struct ExponentialCaseBound {
    double delta_star = 0.0;
    double alpha = 0.0;
    double threshold_T = 0.0;  // alpha < 1 once T exceeds this
};

inline ExponentialCaseBound exponential_alpha_bound(double M, double M_P, double omega_P,
                                                    double omega_plus, double norm_CB, double T) {
    if (!(omega_P > omega_plus) || omega_plus < 0.0)
        throw PreconditionError("need omega_P > omega_plus >= 0");
    ExponentialCaseBound out;
    out.delta_star = (omega_P + omega_plus) / (2.0 * omega_P);
    const double amp = M * M_P * (norm_CB + 1.0);
    out.alpha = amp * std::exp(-(omega_P - omega_plus) * T / 2.0);
    out.threshold_T = 2.0 * std::log(std::max(amp, 1.0)) / (omega_P - omega_plus);
    return out;
}

// ---- empirical verification -----------------------------------------------

struct ObservabilityReport {
    double T = 0.0;
    double r = 2.0;
    double r_conjugate = 2.0;
    double delta = 0.0;
    double C_obs = 0.0;
    double alpha = 0.0;
    double empirical_max_ratio = 0.0;
    int trials = 0;
    int violations = 0;
};

// Random-state check of the weak observation inequality with observation
// through 1_E; the time integral uses composite trapezoid on n_t nodes.
inline ObservabilityReport verify_weak_observability(const FractionalSymbol& sym,
                                                     const ThickSet& set, double T, double r_time,
                                                     double C_obs, double alpha, int trials,
                                                     int n_t, double p, std::uint64_t seed = 1) {
    if (!(T > 0.0)) throw PreconditionError("T must be positive");
    if (n_t < 2) throw PreconditionError("need at least two time nodes");
    if (!(r_time >= 1.0)) throw PreconditionError("r must satisfy r >= 1");
    const GridSpec& g = set.grid;
    check_certificate_covers_grid(sym, g);
    const std::vector<cd> avals = symbol_on_grid(sym, g);
    const std::vector<double> w = trapezoid_weights(n_t, T);

    ObservabilityReport rep;
    rep.T = T;
    rep.r = r_time;
    rep.r_conjugate = conjugate_exponent(r_time);
    rep.delta = 0.0;
    rep.C_obs = C_obs;
    rep.alpha = alpha;
    rep.trials = trials;
    rep.empirical_max_ratio = -kInf;

    for (int tr = 0; tr < trials; ++tr) {
        Rng rng(seed, 3000 + tr);
        StateVector x = random_normal_state(g, rng);
        const double nx = lp_norm(x, p);
        if (nx == 0.0) continue;
        for (cd& z : x.v) z /= nx;
        const std::vector<cd> spec = dft(x);

        double time_acc = 0.0, time_max = 0.0, lhs = 0.0;
        for (int j = 0; j < n_t; ++j) {
            const double t = T * j / (n_t - 1);
            std::vector<cd> sj(spec.size());
            for (std::size_t k = 0; k < spec.size(); ++k)
                sj[k] = spec[k] * std::exp(-t * avals[k]);
            StateVector st = idft(std::move(sj), g);
            const double obs = lp_norm(restrict_state(st, set), p);
            if (std::isinf(r_time))
                time_max = std::max(time_max, obs);
            else
                time_acc += w[j] * std::pow(obs, r_time);
            if (j == n_t - 1) lhs = lp_norm(st, p);
        }
        const double time_term =
            std::isinf(r_time) ? time_max : std::pow(time_acc, 1.0 / r_time);
        double ratio;
        if (time_term > 0.0)
            ratio = (lhs - alpha) / time_term;
        else
            ratio = lhs - alpha > 0.0 ? kInf : 0.0;
        rep.empirical_max_ratio = std::max(rep.empirical_max_ratio, ratio);
        if (ratio > C_obs) ++rep.violations;
    }
    return rep;
}

// ---- measured chain -------------------------------------------------------

struct ChainConstants {
    UncertaintyEstimate uncertainty;
    DissipationEstimate dissipation;
    GrowthBound growth;
    ObsConstants obs;
    double norm_C = 1.0;
};

// Feeds measured uncertainty and dissipation constants through the abstract
// observation-constant formulas for the grid semigroup restricted to E.
inline ChainConstants chain_constants(const FractionalSymbol& sym, const ThickSet& set,
                                      double lambda, double T, double delta, double r, double p,
                                      int unc_trials, std::uint64_t seed = 1) {
    ChainConstants ch;
    ch.uncertainty = estimate_uncertainty(set, lambda, p, unc_trials, seed);
    ch.dissipation =
        verify_dissipation(sym, set.grid, lambda, linspace(delta * T, T, 16), p);
    ch.growth = semigroup_growth_bound(sym, set.grid, p, linspace(T / 16.0, T, 16));
    ch.norm_C = set.empty() ? 0.0 : 1.0;
    const double c1 = ch.uncertainty.c1_hat;
    const double K = ch.dissipation.K;
    const double rate = ch.dissipation.rate;
    ch.obs = observability_constants([c1](double) { return c1; },
                                     [K, rate](double t) { return K * std::exp(-rate * t); },
                                     ch.growth.M, ch.growth.omega, T, r, delta, ch.norm_C);
    return ch;
}

}  // namespace stabilab
