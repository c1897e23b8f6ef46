#pragma once

#include <glv/operators.hpp>
#include <glv/vortex.hpp>

#include <limits>
#include <numbers>

namespace glv {

// V = 2U'/(rU) + 2U'^2/U^2 + (1 - U^2), the potential of the conjugated factorization of H2
inline double susy_potential(const VortexProfile& p, double r) {
    const Pt u = p.eval(r);
    const double q = u.d / u.v;
    return 2 * q / r + 2 * q * q + p.one_minus_U2(r);
}

// D f = f' - (U'/U) f
inline double susy_factor(const VortexProfile& p, double r, double f, double df) {
    const Pt u = p.eval(r);
    return df - (u.d / u.v) * f;
}

struct SusyReport {
    double min_value = 0;
    double r_at_min = 0;
};

inline SusyReport susy_positivity(const VortexProfile& p, const std::vector<double>& r_grid) {
    if (p.degree != 1) throw ConfigError("the factorization is stated for the degree-1 vortex");
    if (r_grid.empty()) throw ConfigError("empty r grid");
    SusyReport s;
    s.min_value = std::numeric_limits<double>::infinity();
    for (double r : r_grid) {
        if (!(r > 0)) throw ConfigError("r grid must be positive");
        const double v = susy_potential(p, r);
        if (v < s.min_value) s.min_value = v, s.r_at_min = r;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lieb-Thirring bound on the eigenvalues of H1 below 2

struct LtBoundResult {
    double gamma = 2;
    double r0 = 0, r1 = 7;
    double A = 0;
    double tail_constant = 2.3;  // (3 m - 1) with m bounding r^2 (1 - U^2) beyond r1
    double R_tail = 0;
    double trace_bound = 0;
    double lambda0 = 0;
    // same with the tail constant from the measured sup of r^2 (1 - U^2) beyond r1
    double tail_constant_sharp = 0;
    double R_tail_sharp = 0;
    double trace_bound_sharp = 0;
    double lambda0_sharp = 0;
    // first-order change of A for a shift of U by the shooting bracket width
    double A_sensitivity = 0;
};

// negative part of 1/r^2 - 3(1 - U^2)
inline double lt_potential(const VortexProfile& p, double r) { return 1.0 / (r * r) - 3.0 * p.one_minus_U2(r); }

struct TailClaim {
    double max_value = 0;
    double r_at_max = 0;
};

inline TailClaim tail_sup(const VortexProfile& p, double r_lo, double r_hi) {
    TailClaim t;
    const size_t n = size_t(std::ceil((r_hi - r_lo) / 0.01));
    for (size_t i = 0; i <= n; ++i) {
        const double r = r_lo + (r_hi - r_lo) * double(i) / double(n);
        const double v = r * r * p.one_minus_U2(r);
        if (v > t.max_value) t.max_value = v, t.r_at_max = r;
    }
    return t;
}

inline TailClaim verify_tail_claim(const VortexProfile& p, double r_lo = 7, double r_hi = 400) {
    if (p.r_max < r_hi) throw ConfigError("tail claim needs a profile solved out to r=" + std::to_string(r_hi));
    return tail_sup(p, r_lo, r_hi);
}

// -0.1 r^-2 + (1.65 + 3 * 0.55^2) r^-4 - 0.55^3 r^-6
inline double tail_barrier(double r) {
    const double x = 1.0 / (r * r);
    return -0.1 * x + (1.65 + 3 * 0.55 * 0.55) * x * x - 0.55 * 0.55 * 0.55 * x * x * x;
}

inline LtBoundResult lt_bound(const VortexProfile& p, double gamma = 2, double r1 = 7, double tail_constant = 2.3,
                              const Tolerance& tol = {}) {
    if (p.degree != 1) throw ConfigError("the eigenvalue bound is stated for the degree-1 vortex");
    if (!(gamma >= 1.5)) throw ConfigError("gamma must be >= 3/2");
    if (!(r1 > 1) || !(tail_constant > 0)) throw ConfigError("r1 must exceed 1 and the tail constant be positive");
    LtBoundResult out;
    out.gamma = gamma;
    out.r1 = r1;
    out.tail_constant = tail_constant;
    auto V = [&p](double r) { return lt_potential(p, r); };
    if (!(V(0.05) > 0)) throw NumericalError("lt_bound: potential not positive near the origin");
    if (!(V(r1) < 0)) throw NumericalError("lt_bound: potential not negative at r1 (profile corrupt?)");
    out.r0 = find_root_bracketed(V, 0.05, r1, 1e-13);
    for (int i = 1; i < 200; ++i) {
        const double r = out.r0 + (r1 - out.r0) * i / 200.0;
        if (!(V(r) < 0)) throw NumericalError("lt_bound: potential is not negative on (r0, r1) (profile corrupt?)");
    }
    auto integrand = [&](double r, double shift) {
        const double u = p(r) + shift;
        const double neg = 3 * (1 - u * u) - 1 / (r * r);
        return neg > 0 ? std::pow(neg, gamma + 1) * r : 0.0;
    };
    out.A = quad_adaptive([&](double r) { return integrand(r, 0); }, out.r0, r1, tol.rel);
    const double h = 1e-6;
    const double dA = (quad_adaptive([&](double r) { return integrand(r, h); }, out.r0, r1, tol.rel) -
                       quad_adaptive([&](double r) { return integrand(r, -h); }, out.r0, r1, tol.rel)) /
                      (2 * h);
    out.A_sensitivity = std::abs(dA) * p.bracket_width;

    // c^{g+1} int_{r1}^inf r^{-2(g+1)} r dr
    auto tail = [&](double c) { return std::pow(c, gamma + 1) * std::pow(r1, -2 * gamma) / (2 * gamma); };
    auto finish = [&](double R, double& trace, double& lam) {
        trace = (out.A + R) / (2 * (gamma + 1));
        lam = 2 - std::pow(trace, 1 / gamma);
    };
    out.R_tail = tail(tail_constant);
    finish(out.R_tail, out.trace_bound, out.lambda0);
    const double m = tail_sup(p, r1, std::max(400.0, 4 * r1)).max_value;
    out.tail_constant_sharp = 3 * m - 1;
    out.R_tail_sharp = tail(out.tail_constant_sharp);
    finish(out.R_tail_sharp, out.trace_bound_sharp, out.lambda0_sharp);
    if (!(out.lambda0 > 0 && out.lambda0 < 2)) throw NumericalError("lt_bound: trace bound leaves no gap");
    return out;
}

// ---------------------------------------------------------------------------
// Eigenvalues of H1 in (0, 2) by shooting

struct EigenOptions {
    double r_small = 1e-3;
    double r_mid = 3;
    double R_big = 150;
    double scan_lo = 0;
    double scan_step = 0.005;
    Tolerance tol{1e-12, 1e-14};
};

// Wronskian of the regular solution and the decaying solution at r_mid, both normalized
// to unit (f, f') there.
inline double shooting_mismatch(const VortexProfile& p, double lambda, const EigenOptions& o = {}) {
    if (!(lambda < 2)) throw ConfigError("shooting needs lambda < 2");
    const Operator op = Operator::H1(1);
    auto rhs = [&](double r, const Vec<2>& y, Vec<2>& dy) {
        dy[0] = y[1];
        dy[1] = (op.Q(p, r) + op.sigma() - lambda) * y[0];
    };
    OdeOptions opt;
    opt.dense = false;
    const double rs = o.r_small, c = -(1 + lambda) / 8;
    const Vec<2> yl0 = {std::pow(rs, 1.5) * (1 + c * rs * rs), std::sqrt(rs) * (1.5 + 3.5 * c * rs * rs)};
    const Vec<2> yl = integrate_ode<2>(rhs, rs, o.r_mid, yl0, o.tol, opt).y_end;
    const double kappa = std::sqrt(2 - lambda);
    const Vec<2> yr = integrate_ode<2>(rhs, o.R_big, o.r_mid, Vec<2>{1.0, -kappa}, o.tol, opt).y_end;
    const double nl = std::hypot(yl[0], yl[1]), nr = std::hypot(yr[0], yr[1]);
    return (yl[0] * yr[1] - yl[1] * yr[0]) / (nl * nr);
}

// lambdas in [lo, hi] where the mismatch changes sign between scan points
inline std::vector<std::pair<double, double>> scan_sign_changes(const VortexProfile& p, double lo, double hi,
                                                                const EigenOptions& o = {}, unsigned threads = 1) {
    if (!(hi > lo)) throw ConfigError("empty lambda window");
    const size_t n = size_t(std::ceil((hi - lo) / o.scan_step));
    std::vector<double> lam(n + 1), w(n + 1);
    for (size_t i = 0; i <= n; ++i) lam[i] = std::min(hi, lo + o.scan_step * double(i));
    parallel_for(n + 1, threads, [&](size_t i) { w[i] = shooting_mismatch(p, lam[i], o); });
    std::vector<std::pair<double, double>> out;
    for (size_t i = 0; i < n; ++i)
        if (w[i] == 0 || w[i] * w[i + 1] < 0) out.push_back({lam[i], lam[i + 1]});
    return out;
}

struct EigenvalueList {
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    size_t requested = 0;
    double R_big = 0;
    double window_hi = 0;  // largest resolvable lambda, 2 - (4 / R_big)^2
    bool complete() const { return eigenvalues.size() >= requested; }
};

inline EigenvalueList find_eigenvalues(const VortexProfile& p, size_t count, const EigenOptions& o = {},
                                       unsigned threads = 1) {
    if (p.degree != 1) throw ConfigError("the eigenvalue search is set up for the degree-1 vortex");
    if (count == 0 || count > 8) throw ConfigError("count must be in [1, 8]");
    if (!(o.R_big > o.r_mid && o.r_mid > o.r_small && o.r_small > 0)) throw ConfigError("need 0 < r_small < r_mid < R_big");
    EigenvalueList out;
    out.requested = count;
    out.R_big = o.R_big;
    out.window_hi = 2 - std::pow(4 / o.R_big, 2);
    for (const auto& [a, b] : scan_sign_changes(p, o.scan_lo, out.window_hi, o, threads)) {
        const double lam = find_root_bracketed([&](double l) { return shooting_mismatch(p, l, o); }, a, b, 1e-13);
        out.eigenvalues.push_back(lam);
        out.residuals.push_back(std::abs(shooting_mismatch(p, lam, o)));
        if (out.eigenvalues.size() == count) break;
    }
    return out;
}

}  // namespace glv
