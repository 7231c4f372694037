#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "multi_index.hpp"
#include "util.hpp"

namespace stabilab {

using CoeffMap = std::map<MultiIndex, cd, GradedLess>;

// Complex-coefficient polynomial a(xi) = sum_alpha c_alpha xi^alpha on R^d.
struct PolynomialSymbol {
    int dimension = 1;   // d in {1,2,3}
    int degree = 1;      // m >= 1
    CoeffMap coeffs;

    cd evaluate(const std::vector<double>& xi) const {
        cd acc = 0.0;
        for (const auto& [alpha, c] : coeffs) {
            double mono = 1.0;
            for (int i = 0; i < dimension; ++i)
                for (int k = 0; k < alpha[i]; ++k) mono *= xi[i];
            acc += c * mono;
        }
        return acc;
    }
};

inline PolynomialSymbol make_polynomial_symbol(int dimension, int degree, CoeffMap coeffs) {
    if (dimension < 1 || dimension > 3)
        throw PreconditionError("symbol dimension must be 1, 2 or 3");
    if (degree < 1) throw PreconditionError("symbol degree must be >= 1");
    bool top_nonzero = false;
    for (const auto& [alpha, c] : coeffs) {
        if (static_cast<int>(alpha.size()) != dimension)
            throw PreconditionError("multi-index " + mi_to_string(alpha) + " has wrong length");
        for (int e : alpha)
            if (e < 0) throw PreconditionError("negative entry in multi-index " + mi_to_string(alpha));
        const int o = mi_order(alpha);
        if (o > degree)
            throw PreconditionError("multi-index " + mi_to_string(alpha) + " exceeds stated degree");
        if (o == degree && c != cd(0.0)) top_nonzero = true;
    }
    if (!top_nonzero)
        throw PreconditionError("no nonzero coefficient at the stated degree");
    return PolynomialSymbol{dimension, degree, std::move(coeffs)};
}

// Witness that Re a(xi) >= c|xi|^m - omega held on a frequency sample set.
struct EllipticityCertificate {
    double c = 0.0;
    double omega = 0.0;
    double xi_max = 0.0;                            // largest |xi| among samples
    bool validated = false;
    std::optional<std::vector<double>> violation;   // first failing xi, if any
};

inline double euclid_norm(const std::vector<double>& xi) {
    double s = 0.0;
    for (double x : xi) s += x * x;
    return std::sqrt(s);
}

inline EllipticityCertificate certify_ellipticity(const PolynomialSymbol& sym,
                                                  const std::vector<std::vector<double>>& samples,
                                                  double c, double omega) {
    if (c <= 0.0) throw PreconditionError("ellipticity constant c must be positive");
    if (samples.empty()) throw PreconditionError("empty frequency sample set");
    EllipticityCertificate cert;
    cert.c = c;
    cert.omega = omega;
    cert.validated = true;
    for (const auto& xi : samples) {
        const double r = euclid_norm(xi);
        cert.xi_max = std::max(cert.xi_max, r);
        const double lhs = sym.evaluate(xi).real();
        if (lhs < c * std::pow(r, sym.degree) - omega) {
            if (cert.validated) cert.violation = xi;
            cert.validated = false;
        }
    }
    return cert;
}

// Smallest omega making the lower bound hold with the given c over the samples.
inline double minimal_omega(const PolynomialSymbol& sym,
                            const std::vector<std::vector<double>>& samples, double c) {
    double omega = -kInf;
    for (const auto& xi : samples) {
        const double r = euclid_norm(xi);
        omega = std::max(omega, c * std::pow(r, sym.degree) - sym.evaluate(xi).real());
    }
    return omega;
}

// Largest integer strictly below s*m; the admissible degree for the shift b.
inline int perturbation_degree_cap(double s, int m) {
    const double sm = s * m;
    const double fl = std::floor(sm);
    return (fl == sm) ? static_cast<int>(fl) - 1 : static_cast<int>(fl);
}

// Symbol (a(xi) + omega)^s + b(xi), principal branch, with its certificate.
struct FractionalSymbol {
    PolynomialSymbol base;
    EllipticityCertificate cert;
    double s = 1.0;         // fractional power in (0,1]
    CoeffMap b_coeffs;      // lower-order shift, degree <= perturbation_degree_cap(s, m)
    double nu = std::numeric_limits<double>::quiet_NaN();  // set by compute_nu

    double power() const { return s * base.degree; }  // the effective order s*m

    cd evaluate(const std::vector<double>& xi) const {
        const cd w = base.evaluate(xi) + cert.omega;
        cd pw;
        if (w == cd(0.0)) {
            pw = 0.0;
        } else {
            if (w.imag() == 0.0 && w.real() < 0.0)
                throw PreconditionError(
                    "branch cut hit: a(xi)+omega is negative real; certificate invalid at this xi");
            pw = std::pow(w, s);
        }
        cd shift = 0.0;
        for (const auto& [alpha, c] : b_coeffs) {
            double mono = 1.0;
            for (int i = 0; i < base.dimension; ++i)
                for (int k = 0; k < alpha[i]; ++k) mono *= xi[i];
            shift += c * mono;
        }
        return pw + shift;
    }
};

inline FractionalSymbol make_fractional_symbol(PolynomialSymbol base, EllipticityCertificate cert,
                                               double s, CoeffMap b_coeffs = {}) {
    if (!(s > 0.0 && s <= 1.0)) throw PreconditionError("fractional power s must lie in (0,1]");
    if (!cert.validated) throw PreconditionError("ellipticity certificate not validated");
    const int cap = perturbation_degree_cap(s, base.degree);
    for (const auto& [alpha, c] : b_coeffs) {
        if (static_cast<int>(alpha.size()) != base.dimension)
            throw PreconditionError("shift multi-index " + mi_to_string(alpha) + " has wrong length");
        if (mi_order(alpha) > cap)
            throw PreconditionError("shift term " + mi_to_string(alpha) +
                                    " exceeds admissible degree " + std::to_string(cap));
    }
    return FractionalSymbol{std::move(base), cert, s, std::move(b_coeffs)};
}

// Defect of the lower bound Re a_{s,b}(xi) >= c^s |xi|^{s m} - nu over the
// samples; the returned value is stored on the symbol for downstream use.
// May be negative when the shift strengthens the bound.
inline double compute_nu(FractionalSymbol& sym, const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw PreconditionError("empty frequency sample set");
    const double cs = std::pow(sym.cert.c, sym.s);
    const double sm = sym.power();
    double nu = -kInf;
    for (const auto& xi : samples) {
        const double r = euclid_norm(xi);
        nu = std::max(nu, cs * std::pow(r, sm) - sym.evaluate(xi).real());
    }
    sym.nu = nu;
    return nu;
}

}  // namespace stabilab
