#pragma once

#include <glv/eigenfunctions.hpp>

#include <algorithm>
#include <limits>
#include <numbers>

namespace glv {

inline double japanese(double k) { return std::sqrt(1 + k * k); }

struct Connection {
    double k = 0;
    cplx a = 0;
    double spread = 0;
    // max(|Phi| sqrt(k), |Phi'| / sqrt(k)) at r = c_match / k
    double lower_floor = 0;
};

inline Connection connection_coefficient(const SpectralContext& ctx, double k) {
    const Eigenfunction e = ctx.eigenfunction(k);
    Connection c;
    c.k = k;
    c.a = e.a_conn;
    c.spread = e.spread;
    const Pt f = e.inner.eval(ctx.c_match() / k);
    c.lower_floor = std::max(std::abs(f.v) * std::sqrt(k), std::abs(f.d) / std::sqrt(k));
    return c;
}

struct SpectralMeasure {
    Operator op;
    int degree = 1;
    std::vector<double> k;
    std::vector<cplx> a;
    std::vector<double> density;
    std::vector<double> spread;
    std::vector<double> lower_floor;
    // band for <k>^n |a| over the grid
    double m = 0, M = 0;

    size_t size() const { return k.size(); }
    double band_value(size_t i) const { return std::pow(japanese(k[i]), degree) * std::abs(a[i]); }
    double max_spread() const { return spread.empty() ? 0 : *std::max_element(spread.begin(), spread.end()); }
};

inline double density_from(cplx a) { return 1.0 / (4 * std::numbers::pi * std::norm(a)); }

inline SpectralMeasure build_measure(const SpectralContext& ctx, const std::vector<double>& k_grid,
                                     unsigned threads = 1) {
    if (k_grid.empty()) throw ConfigError("k grid is empty");
    for (size_t i = 0; i < k_grid.size(); ++i) {
        if (!(k_grid[i] > 0)) throw ConfigError("k grid must be positive");
        if (i && !(k_grid[i] > k_grid[i - 1])) throw ConfigError("k grid must be increasing");
    }
    if (k_grid.front() < ctx.k_min() * (1 - 1e-12)) throw ConfigError("k grid starts below the context's k_min");
    SpectralMeasure s;
    s.op = ctx.op();
    s.degree = ctx.op().n;
    const size_t N = k_grid.size();
    s.k = k_grid;
    s.a.resize(N);
    s.density.resize(N);
    s.spread.resize(N);
    s.lower_floor.resize(N);
    parallel_for(N, threads, [&](size_t i) {
        const Connection c = connection_coefficient(ctx, k_grid[i]);
        s.a[i] = c.a;
        s.spread[i] = c.spread;
        s.lower_floor[i] = c.lower_floor;
        s.density[i] = density_from(c.a);
    });
    s.m = std::numeric_limits<double>::infinity();
    s.M = 0;
    for (size_t i = 0; i < N; ++i) {
        const double v = s.band_value(i);
        if (!(v > 0) || !std::isfinite(v)) throw NumericalError("connection coefficient vanishes at k=" + std::to_string(s.k[i]));
        s.m = std::min(s.m, v);
        s.M = std::max(s.M, v);
    }
    return s;
}

inline SpectralMeasure build_measure(const ZeroEnergyBasis& basis, const std::vector<double>& k_grid,
                                     unsigned threads = 1, double c_match = 0.5) {
    if (k_grid.empty()) throw ConfigError("k grid is empty");
    const SpectralContext ctx(basis, k_grid.front(), c_match);
    return build_measure(ctx, k_grid, threads);
}

}  // namespace glv
