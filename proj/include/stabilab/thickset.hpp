#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "util.hpp"

namespace stabilab {

// Union of grid cells claimed to be (rho, cube)-thick: every translate of the
// box prod_i (0, cube_i) meets it in measure >= rho * prod_i cube_i.
struct ThickSet {
    GridSpec grid;
    std::vector<std::uint8_t> mask;   // cell indicator, row-major
    double rho = 0.0;
    std::vector<double> cube;         // per-axis window extents, each <= ell
    bool verified = false;

    double measure() const {
        long c = 0;
        for (auto m : mask) c += m;
        return c * grid.cell_measure();
    }
    bool empty() const {
        return std::all_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m == 0; });
    }
};

struct ThicknessVerdict {
    bool ok = false;
    double min_measure = 0.0;   // worst window intersection measure
    long worst_translate = 0;   // flat cell index of the worst window anchor
    double rho_margin = 0.0;    // conservative density after half-cell safety margin
};

namespace detail {

// Coverage of cell offsets by a length-L window anchored at a cell corner.
// Entry q is the measure of [q h, (q+1) h) intersected with (0, L); the same
// weights apply to every anchor because windows are scanned at cell corners.
inline std::vector<double> window_weights(double L, double h) {
    std::vector<double> w;
    for (int q = 0;; ++q) {
        const double lo = q * h;
        if (lo >= L - 1e-15 * L) break;
        w.push_back(std::min((q + 1) * h, L) - lo);
    }
    return w;
}

}  // namespace detail

// Exhaustive scan over all n^d cell-corner anchors of the cube window.  For
// cube extents that are whole multiples of the spacing the window measure is
// piecewise linear between corner anchors, so the corner scan is exact; in
// general the half-cell margin in rho_margin accounts for sub-cell anchors.
inline ThicknessVerdict verify_thickness(ThickSet& set) {
    const GridSpec& g = set.grid;
    if (static_cast<long>(set.mask.size()) != g.total())
        throw PreconditionError("mask size does not match grid");
    if (static_cast<int>(set.cube.size()) != g.d)
        throw PreconditionError("cube extent count does not match grid dimension");
    double vol = 1.0;
    for (double L : set.cube) {
        if (!(L > 0.0) || L > g.ell * (1.0 + 1e-12))
            throw PreconditionError("cube extents must lie in (0, ell]");
        vol *= L;
    }
    const double h = g.spacing();
    std::array<std::vector<double>, 3> w;
    for (int a = 0; a < g.d; ++a) w[a] = detail::window_weights(set.cube[a], h);

    ThicknessVerdict verdict;
    verdict.min_measure = kInf;
    std::array<int, 3> q{0, 0, 0};
    for (long t = 0; t < g.total(); ++t) {
        const auto anchor = axis_indices(t, g);
        double acc = 0.0;
        // iterate the window cells of the (up to) 3-dim weight box
        const int q0 = static_cast<int>(w[0].size());
        const int q1 = g.d > 1 ? static_cast<int>(w[1].size()) : 1;
        const int q2 = g.d > 2 ? static_cast<int>(w[2].size()) : 1;
        for (q[0] = 0; q[0] < q0; ++q[0])
            for (q[1] = 0; q[1] < q1; ++q[1])
                for (q[2] = 0; q[2] < q2; ++q[2]) {
                    long flat = 0;
                    double weight = 1.0;
                    for (int a = 0; a < g.d; ++a) {
                        flat = flat * g.n + (anchor[a] + q[a]) % g.n;
                        weight *= w[a][q[a]];
                    }
                    if (set.mask[flat]) acc += weight;
                }
        if (acc < verdict.min_measure) {
            verdict.min_measure = acc;
            verdict.worst_translate = t;
        }
    }
    verdict.ok = verdict.min_measure + 1e-12 * std::max(1.0, vol) >= set.rho * vol;
    verdict.rho_margin =
        std::max(0.0, (verdict.min_measure - 0.5 * g.cell_measure()) / vol);
    set.verified = verdict.ok;
    return verdict;
}

// Periodic set from a tile of tile_extents[i] cells per axis (each dividing
// n) with the given cell pattern; rho is the tile density and cube the tile's
// physical size, both exact by periodicity.
inline ThickSet generate_periodic(const GridSpec& g, const std::vector<int>& tile_extents,
                                  const std::vector<std::uint8_t>& tile_pattern) {
    if (static_cast<int>(tile_extents.size()) != g.d)
        throw PreconditionError("tile extent count does not match grid dimension");
    long tile_total = 1;
    for (int c : tile_extents) {
        if (c < 1 || g.n % c != 0)
            throw PreconditionError("tile extents must divide the grid extent");
        tile_total *= c;
    }
    if (static_cast<long>(tile_pattern.size()) != tile_total)
        throw PreconditionError("tile pattern size does not match tile extents");
    ThickSet set;
    set.grid = g;
    set.mask.assign(g.total(), 0);
    long active = 0;
    for (auto b : tile_pattern) active += (b != 0);
    for (long j = 0; j < g.total(); ++j) {
        const auto ix = axis_indices(j, g);
        long tflat = 0;
        for (int a = 0; a < g.d; ++a) tflat = tflat * tile_extents[a] + ix[a] % tile_extents[a];
        set.mask[j] = tile_pattern[tflat] ? 1 : 0;
    }
    set.rho = static_cast<double>(active) / tile_total;
    set.cube.resize(g.d);
    for (int a = 0; a < g.d; ++a) set.cube[a] = tile_extents[a] * g.spacing();
    verify_thickness(set);
    return set;
}

// Convenience product-set tile: within a physical tile of size cube_phys per
// axis, the first duty[i] fraction of cells is active along each axis.  The
// d=1 alternating half-cell set is cube_phys = 1, duty = 1/2.
inline ThickSet generate_periodic_duty(const GridSpec& g, const std::vector<double>& cube_phys,
                                       const std::vector<double>& duty) {
    std::vector<int> ext(g.d);
    for (int a = 0; a < g.d; ++a) {
        const double cells = cube_phys[a] / g.spacing();
        ext[a] = static_cast<int>(std::lround(cells));
        if (ext[a] < 1 || std::abs(cells - ext[a]) > 1e-9)
            throw PreconditionError("tile size must be a whole number of cells");
    }
    long tile_total = 1;
    for (int c : ext) tile_total *= c;
    std::vector<std::uint8_t> pattern(tile_total, 0);
    for (long t = 0; t < tile_total; ++t) {
        long rem = t;
        bool on = true;
        for (int a = g.d - 1; a >= 0; --a) {
            const int ix = static_cast<int>(rem % ext[a]);
            rem /= ext[a];
            if (ix >= duty[a] * ext[a] - 1e-9) on = false;
        }
        pattern[t] = on ? 1 : 0;
    }
    return generate_periodic(g, ext, pattern);
}

// Random set built from aligned blocks of cube/h cells, each filled to at
// least rho density.  Every window of size 2*cube then contains a full block,
// so the set is (rho_block / 2^d, 2*cube)-thick by construction; those are
// the parameters recorded and re-verified.
inline ThickSet generate_random(const GridSpec& g, double rho, const std::vector<double>& cube,
                                std::uint64_t seed) {
    if (!(rho > 0.0 && rho <= 1.0)) throw PreconditionError("rho must lie in (0, 1]");
    std::vector<int> ext(g.d);
    long block_total = 1;
    for (int a = 0; a < g.d; ++a) {
        const double cells = cube[a] / g.spacing();
        ext[a] = static_cast<int>(std::lround(cells));
        if (ext[a] < 1 || std::abs(cells - ext[a]) > 1e-9)
            throw PreconditionError("cube must be a whole number of cells");
        if (g.n % ext[a] != 0) throw PreconditionError("cube cells must divide the grid extent");
        if (2 * ext[a] > g.n)
            throw PreconditionError("doubled cube must fit in the period (cube <= ell/2)");
        block_total *= ext[a];
    }
    long need = static_cast<long>(std::ceil(rho * block_total - 1e-9));
    need = std::max<long>(1, std::min(need, block_total));

    ThickSet set;
    set.grid = g;
    set.mask.assign(g.total(), 0);
    std::array<int, 3> blocks{1, 1, 1};
    long n_blocks = 1;
    for (int a = 0; a < g.d; ++a) {
        blocks[a] = g.n / ext[a];
        n_blocks *= blocks[a];
    }
    std::vector<long> cells(block_total);
    for (long b = 0; b < n_blocks; ++b) {
        // block corner in cell coordinates
        std::array<int, 3> corner{0, 0, 0};
        long rem = b;
        for (int a = g.d - 1; a >= 0; --a) {
            corner[a] = static_cast<int>(rem % blocks[a]) * ext[a];
            rem /= blocks[a];
        }
        std::iota(cells.begin(), cells.end(), 0);
        Rng rng(seed, static_cast<std::uint64_t>(b));
        for (long pick = 0; pick < need; ++pick) {
            const long j = pick + static_cast<long>(rng.below(block_total - pick));
            std::swap(cells[pick], cells[j]);
            // decode row-major local index into per-axis offsets
            long local = cells[pick];
            std::array<int, 3> off{0, 0, 0};
            for (int a = g.d - 1; a >= 0; --a) {
                off[a] = static_cast<int>(local % ext[a]);
                local /= ext[a];
            }
            long flat = 0;
            for (int a = 0; a < g.d; ++a) flat = flat * g.n + corner[a] + off[a];
            set.mask[flat] = 1;
        }
    }
    set.rho = (static_cast<double>(need) / block_total) / std::pow(2.0, g.d);
    set.cube.resize(g.d);
    for (int a = 0; a < g.d; ++a) set.cube[a] = 2.0 * ext[a] * g.spacing();
    verify_thickness(set);
    return set;
}

// Pointwise restriction 1_E f.
inline StateVector restrict_state(const StateVector& s, const ThickSet& set) {
    if (!same_geometry(s.grid, set.grid))
        throw PreconditionError("state and set live on different grids");
    StateVector out = s;
    for (long j = 0; j < static_cast<long>(out.v.size()); ++j)
        if (!set.mask[j]) out.v[j] = 0.0;
    return out;
}

// Mask round-trip through the state container (persists via save_state).
inline StateVector mask_as_state(const ThickSet& set) {
    StateVector s = zero_state(set.grid);
    for (long j = 0; j < static_cast<long>(s.v.size()); ++j) s.v[j] = set.mask[j] ? 1.0 : 0.0;
    return s;
}

inline ThickSet set_from_state(const StateVector& s, double rho, std::vector<double> cube) {
    ThickSet set;
    set.grid = s.grid;
    set.mask.resize(s.v.size());
    for (long j = 0; j < static_cast<long>(s.v.size()); ++j)
        set.mask[j] = std::abs(s.v[j]) > 0.5 ? 1 : 0;
    set.rho = rho;
    set.cube = std::move(cube);
    return set;
}

}  // namespace stabilab
