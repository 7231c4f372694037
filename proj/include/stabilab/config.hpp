#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "lattice.hpp"
#include "symbols.hpp"
#include "thickset.hpp"

namespace stabilab {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    std::string low;
    for (char c : s) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (low == "inf" || low == "+inf" || low == "infinity") return kInf;
    if (low == "-inf" || low == "-infinity") return -kInf;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw PreconditionError(where + ": not a number: '" + s + "'");
    return v;
}

// Flat key=value configuration.  Repeated keys accumulate (lists); for scalar
// lookups the last occurrence wins so command-line overrides can append.
struct RunConfig {
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const {
        for (auto it = entries.rbegin(); it != entries.rend(); ++it)
            if (it->first == key) return true;
        return false;
    }
    std::string get(const std::string& key) const {
        for (auto it = entries.rbegin(); it != entries.rend(); ++it)
            if (it->first == key) return it->second;
        throw PreconditionError("missing config key '" + key + "'");
    }
    std::string get_or(const std::string& key, const std::string& dflt) const {
        return has(key) ? get(key) : dflt;
    }
    std::vector<std::string> get_all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries)
            if (k == key) out.push_back(v);
        return out;
    }
    double get_double(const std::string& key) const { return parse_double(get(key), key); }
    double get_double_or(const std::string& key, double dflt) const {
        return has(key) ? get_double(key) : dflt;
    }
    int get_int(const std::string& key) const {
        const double v = get_double(key);
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw PreconditionError(key + ": expected an integer, got '" + get(key) + "'");
        return i;
    }
    int get_int_or(const std::string& key, int dflt) const {
        return has(key) ? get_int(key) : dflt;
    }
    void set(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }

    static RunConfig from_string(const std::string& text, const std::string& name) {
        const std::string body = trim(text);
        if (!body.empty() && body[0] == '{') return from_json_text(body, name);
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw PreconditionError(name + ":" + std::to_string(lineno) +
                                        ": expected 'key = value', got '" + t + "'");
            const std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty())
                throw PreconditionError(name + ":" + std::to_string(lineno) + ": empty key");
            cfg.entries.emplace_back(key, value);
        }
        return cfg;
    }

    static RunConfig from_json_text(const std::string& text, const std::string& name) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw PreconditionError(name + ": " + e.what());
        }
        RunConfig cfg;
        flatten_json(j, "", cfg, name);
        return cfg;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw PreconditionError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

  private:
    static void flatten_json(const nlohmann::json& j, const std::string& prefix, RunConfig& cfg,
                             const std::string& name) {
        if (j.is_object()) {
            for (const auto& [k, v] : j.items()) {
                const std::string key = prefix.empty() ? k : prefix + "." + k;
                flatten_json(v, key, cfg, name);
            }
        } else if (j.is_array()) {
            for (const auto& v : j) flatten_json(v, prefix, cfg, name);
        } else if (j.is_string()) {
            cfg.entries.emplace_back(prefix, j.get<std::string>());
        } else if (j.is_boolean()) {
            cfg.entries.emplace_back(prefix, j.get<bool>() ? "true" : "false");
        } else if (j.is_number()) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
            cfg.entries.emplace_back(prefix, buf);
        } else if (j.is_null()) {
            cfg.entries.emplace_back(prefix, "");
        } else {
            throw PreconditionError(name + ": unsupported JSON value at '" + prefix + "'");
        }
    }
};

// ---- config-driven factories ----

// coefficient entry format: "i1 .. id : re [im]"
inline void parse_coeff_entry(const std::string& raw, int dimension, MultiIndex& idx, cd& value,
                              const std::string& where) {
    const std::size_t colon = raw.find(':');
    if (colon == std::string::npos)
        throw PreconditionError(where + ": expected 'indices : re [im]', got '" + raw + "'");
    std::istringstream left(raw.substr(0, colon));
    idx.clear();
    int i;
    while (left >> i) idx.push_back(i);
    if (static_cast<int>(idx.size()) != dimension)
        throw PreconditionError(where + ": multi-index length " + std::to_string(idx.size()) +
                                " does not match dimension " + std::to_string(dimension));
    std::istringstream right(raw.substr(colon + 1));
    double re = 0.0, im = 0.0;
    if (!(right >> re))
        throw PreconditionError(where + ": missing coefficient value in '" + raw + "'");
    right >> im;
    value = cd(re, im);
}

inline PolynomialSymbol symbol_from_config(const RunConfig& cfg, const std::string& prefix) {
    const int dimension = cfg.get_int(prefix + ".dimension");
    const int degree = cfg.get_int(prefix + ".degree");
    CoeffMap coeffs;
    for (const auto& raw : cfg.get_all(prefix + ".coeff")) {
        MultiIndex idx;
        cd value;
        parse_coeff_entry(raw, dimension, idx, value, prefix + ".coeff");
        coeffs[idx] += value;
    }
    return make_polynomial_symbol(dimension, degree, coeffs);
}

// Certifies over the grid's own frequency lattice, the only points the
// multiplier calculus ever evaluates.
inline FractionalSymbol fractional_from_config(const RunConfig& cfg, const std::string& prefix,
                                               const GridSpec& grid) {
    PolynomialSymbol base = symbol_from_config(cfg, prefix);
    const double s = cfg.get_double(prefix + ".s");
    const double c = cfg.get_double_or(prefix + ".c", 1.0);
    const auto samples = grid_frequencies(grid);
    double omega;
    if (cfg.has(prefix + ".omega")) {
        omega = cfg.get_double(prefix + ".omega");
    } else {
        omega = std::max(0.0, minimal_omega(base, samples, c));
    }
    EllipticityCertificate cert = certify_ellipticity(base, samples, c, omega);
    if (!cert.validated)
        throw PreconditionError(prefix + ": ellipticity certificate failed on the grid frequencies");
    CoeffMap b_coeffs;
    for (const auto& raw : cfg.get_all(prefix + ".b")) {
        MultiIndex idx;
        cd value;
        parse_coeff_entry(raw, base.dimension, idx, value, prefix + ".b");
        b_coeffs[idx] += value;
    }
    FractionalSymbol sym = make_fractional_symbol(base, cert, s, b_coeffs);
    compute_nu(sym, samples);
    return sym;
}

inline GridSpec grid_from_config(const RunConfig& cfg) {
    return make_grid(cfg.get_int_or("grid.d", 1), cfg.get_int_or("grid.n", 256),
                     cfg.get_double_or("grid.ell", 32.0), cfg.get_double_or("grid.p", 2.0));
}

inline ThickSet set_from_config(const RunConfig& cfg, const GridSpec& grid) {
    const std::string kind = cfg.get_or("set.kind", "full");
    if (kind == "full") {
        std::vector<int> ext(grid.d, 1);
        return generate_periodic(grid, ext, std::vector<std::uint8_t>{1});
    }
    if (kind == "alternating") {
        const std::vector<double> cube(grid.d, cfg.get_double_or("set.cube", 1.0));
        const std::vector<double> duty(grid.d, cfg.get_double_or("set.duty", 0.5));
        return generate_periodic_duty(grid, cube, duty);
    }
    if (kind == "random") {
        const double rho = cfg.get_double_or("set.rho", 0.5);
        const std::vector<double> cube(grid.d, cfg.get_double_or("set.cube", 1.0));
        const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int_or("set.seed", 1));
        return generate_random(grid, rho, cube, seed);
    }
    throw PreconditionError("set.kind must be full, alternating, or random, got '" + kind + "'");
}

}  // namespace stabilab
