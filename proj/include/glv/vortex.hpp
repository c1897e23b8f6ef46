#pragma once

#include <glv/numerics.hpp>

namespace glv {

struct ShootingOutcome {
    enum class Kind { overshoot, undershoot, converged };
    double slope_trial = 0;
    Kind classification = Kind::converged;
    double r_event = 0;  // where the classification was decided
};

class VortexProfile {
public:
    int degree = 1;
    double slope = 0;      // midpoint of the final shooting bracket
    double r_max = 50;
    double r_start = 1e-3;
    double bracket_lo = 0, bracket_hi = 0, bracket_width = 0;
    Grid grid;             // table nodes
    std::vector<double> U, dU;

    // series U = r^n sum A_m r^{2m}, valid on [0, r_series]
    std::vector<double> series;
    double r_series = 0.5;
    // asymptotics U = 1 + sum_{M>=1} u_M r^{-2M}
    std::vector<double> asym;

    // (U, U') at r >= 0
    Pt eval(double r) const {
        if (r <= r_series) return series_eval(r);
        if (r > r_max) {
            const auto [w, dw] = asym_w(r);
            return {1.0 + w, dw};
        }
        const auto [v, d] = table_.eval(r);
        return {v, d};
    }

    double operator()(double r) const { return eval(r).v; }

    double one_minus_U2(double r) const {
        if (r > r_max) {
            const double w = asym_w(r).first;
            return -w * (2.0 + w);
        }
        const double u = eval(r).v;
        return (1.0 - u) * (1.0 + u);
    }

    // d/dr of 1-U^2
    double d_one_minus_U2(double r) const {
        const Pt p = eval(r);
        return -2.0 * p.v * p.d;
    }

    Pt series_eval(double r) const { return series_eval_with(series, degree, r); }

    // w = U - 1 and w' from the asymptotic series, truncated at the smallest term
    std::pair<double, double> asym_w(double r) const {
        const double x = 1.0 / (r * r);
        double w = 0, dw = 0, xp = 1.0, prev = 1e300;
        for (size_t M = 1; M < asym.size(); ++M) {
            xp *= x;
            const double t = asym[M] * xp;
            if (std::abs(t) > prev) break;
            prev = std::abs(t);
            w += t;
            dw += -2.0 * double(M) * t / r;
            if (prev < 1e-18) break;
        }
        return {w, dw};
    }

    static std::vector<double> series_coefficients(int n, double a, int terms = 24) {
        std::vector<double> A(terms, 0.0);
        A[0] = a;
        // C_p: coefficient of r^{3n+2p} in U^3
        auto cube = [&](int p) {
            double c = 0;
            for (int i = 0; i <= p; ++i)
                for (int j = 0; i + j <= p; ++j) c += A[i] * A[j] * A[p - i - j];
            return c;
        };
        for (int m = 1; m < terms; ++m) {
            double rhs = -A[m - 1];
            const int p = m - 1 - n;
            if (p >= 0) rhs += cube(p);
            A[m] = rhs / (4.0 * m * (m + n));
        }
        return A;
    }

    static Pt series_eval_with(const std::vector<double>& A, int n, double r) {
        if (r == 0) return {0.0, n == 1 ? A[0] : 0.0};
        const double r2 = r * r;
        double s = 0, ds = 0, p = 1.0;
        for (size_t m = 0; m < A.size(); ++m) {
            s += A[m] * p;
            ds += A[m] * double(n + 2 * int(m)) * p;
            p *= r2;
            if (std::abs(A[m]) * p < 1e-19 * std::abs(A[0])) break;
        }
        const double rn = std::pow(r, n);
        return {rn * s, rn * ds / r};
    }

    static std::vector<double> asym_coefficients(int n, int terms = 18) {
        std::vector<double> u(terms, 0.0);
        const double n2 = double(n) * n;
        for (int M = 1; M < terms; ++M) {
            double w2 = 0, w3 = 0;
            for (int i = 1; i < M; ++i) w2 += u[i] * u[M - i];
            for (int i = 1; i < M; ++i)
                for (int j = 1; i + j < M; ++j) w3 += u[i] * u[j] * u[M - i - j];
            u[M] = 0.5 * (4.0 * (M - 1) * (M - 1) * u[M - 1] - n2 * u[M - 1] - (M == 1 ? n2 : 0.0) - 3.0 * w2 - w3);
        }
        return u;
    }

    void set_table(QuinticTable<double> t) { table_ = std::move(t); }

private:
    QuinticTable<double> table_;
};

namespace detail {

inline void vortex_rhs(int n, double r, const Vec<2>& y, Vec<2>& dy) {
    dy[0] = y[1];
    dy[1] = -y[1] / r + double(n) * n * y[0] / (r * r) - (1.0 - y[0] * y[0]) * y[0];
}

}  // namespace detail

// One trial integration from the series start value; decides overshoot/undershoot.
inline ShootingOutcome shoot_profile(int n, double a, double r_stop, const Tolerance& tol, double r_start = 1e-3) {
    const auto A = VortexProfile::series_coefficients(n, a);
    const Pt s = VortexProfile::series_eval_with(A, n, r_start);
    ShootingOutcome out;
    out.slope_trial = a;
    OdeOptions opt;
    opt.dense = false;
    auto rhs = [n](double r, const Vec<2>& y, Vec<2>& dy) { detail::vortex_rhs(n, r, y, dy); };
    bool decided = false;
    Vec<2> last{};
    double r_last = r_start;
    try {
        integrate_ode<2>(rhs, r_start, r_stop, {s.v, s.d}, tol, opt, [&](const DenseStep<2>& st, const Vec<2>& y) {
            last = y;
            r_last = st.x0 + st.h;
            if (y[0] > 1.5) {
                out.classification = ShootingOutcome::Kind::overshoot;
                decided = true;
            } else if (y[1] < 0 && y[0] < 1.0) {
                out.classification = ShootingOutcome::Kind::undershoot;
                decided = true;
            }
            return !decided;
        });
    } catch (const NumericalError&) {
        // blow-up past U = 1.5 within one step
        out.classification = ShootingOutcome::Kind::overshoot;
        out.r_event = r_last;
        return out;
    }
    out.r_event = r_last;
    if (!decided) {
        // reached r_stop within the band: resolve by the side of the asymptotic value
        const auto u = VortexProfile::asym_coefficients(n);
        const double asym = 1.0 + u[1] / (r_stop * r_stop) + u[2] / std::pow(r_stop, 4);
        out.classification = last[0] > asym ? ShootingOutcome::Kind::overshoot : ShootingOutcome::Kind::undershoot;
        if (std::abs(last[0] - asym) < 1e-8) out.classification = ShootingOutcome::Kind::converged;
    }
    return out;
}

namespace detail {

// Multi-element Chebyshev collocation of the profile on [r_left, r_max] with the slope as an
// extra unknown. Returns the refined slope and fills per-element nodal values.
struct ProfileCollocation {
    std::vector<Chebyshev> el;
    std::vector<std::vector<double>> u, du;
    double a = 0;

    Pt eval(double r) const {
        size_t e = 0;
        while (e + 1 < el.size() && r > el[e].b) ++e;
        return {el[e].interp(u[e], r), el[e].interp(du[e], r)};
    }
};

inline std::vector<double> profile_breakpoints(double r_left, double r_max) {
    static const double bp[] = {0.5, 1, 1.5, 2, 3, 4, 5.5, 7.5, 10, 14, 20, 28, 40, 56, 80, 112, 160, 224, 320, 448,
                                640, 900, 1280, 1800, 2560, 3600, 5120};
    std::vector<double> e{r_left};
    for (double b : bp)
        if (b > r_left * 1.0001 && b < r_max) e.push_back(b);
    // avoid a sliver as the last element
    if (e.size() > 1 && (r_max - e.back()) < 0.35 * (e.back() - e[e.size() - 2])) e.pop_back();
    e.push_back(r_max);
    return e;
}

template <class Guess>
ProfileCollocation collocate_profile(int n, double a0, double r_left, double r_max, int deg, Guess&& guess,
                                     const std::vector<double>& asym) {
    ProfileCollocation pc;
    const auto edges = profile_breakpoints(r_left, r_max);
    const int E = int(edges.size()) - 1, m = deg + 1;
    for (int e = 0; e < E; ++e) pc.el.emplace_back(deg, edges[e], edges[e + 1]);
    const int nu = E * m + 1;  // last unknown is the slope
    Eigen::VectorXd x(nu);
    for (int e = 0; e < E; ++e)
        for (int j = 0; j < m; ++j) x(e * m + j) = guess(pc.el[e].x[j]);
    x(nu - 1) = a0;

    std::vector<Eigen::MatrixXd> D2(E);
    for (int e = 0; e < E; ++e) D2[e] = pc.el[e].D * pc.el[e].D;
    const double n2 = double(n) * n;

    auto asym_at = [&](double r) {
        const double xx = 1 / (r * r);
        double w = 0, p = 1, prev = 1e300;
        for (size_t M = 1; M < asym.size(); ++M) {
            p *= xx;
            const double t = asym[M] * p;
            if (std::abs(t) > prev) break;
            prev = std::abs(t);
            w += t;
        }
        return 1.0 + w;
    };
    const double u_right = asym_at(r_max);

    Eigen::MatrixXd J(nu, nu);
    Eigen::VectorXd F(nu);
    double prev_step = 1e300;
    for (int it = 0; it < 40; ++it) {
        J.setZero();
        F.setZero();
        int row = 0;
        const double a = x(nu - 1);
        // left boundary: value and slope from the origin series
        {
            const auto A = VortexProfile::series_coefficients(n, a);
            const double da = 1e-6 * std::max(1e-3, std::abs(a));
            const auto Ap = VortexProfile::series_coefficients(n, a + da);
            const auto Am = VortexProfile::series_coefficients(n, a - da);
            const Pt s = VortexProfile::series_eval_with(A, n, r_left);
            const Pt sp = VortexProfile::series_eval_with(Ap, n, r_left);
            const Pt sm = VortexProfile::series_eval_with(Am, n, r_left);
            F(row) = x(0) - s.v;
            J(row, 0) = 1;
            J(row, nu - 1) = -(sp.v - sm.v) / (2 * da);
            ++row;
            const auto& D = pc.el[0].D;
            double d = 0;
            for (int j = 0; j < m; ++j) {
                d += D(0, j) * x(j);
                J(row, j) = D(0, j);
            }
            F(row) = d - s.d;
            J(row, nu - 1) = -(sp.d - sm.d) / (2 * da);
            ++row;
        }
        for (int e = 0; e < E; ++e) {
            const auto& c = pc.el[e];
            const int o = e * m;
            for (int i = 1; i < deg; ++i) {
                const double r = c.x[i], ui = x(o + i);
                double d1 = 0, d2 = 0;
                for (int j = 0; j < m; ++j) {
                    d1 += c.D(i, j) * x(o + j);
                    d2 += D2[e](i, j) * x(o + j);
                    J(row, o + j) = D2[e](i, j) + c.D(i, j) / r;
                }
                F(row) = d2 + d1 / r - n2 * ui / (r * r) + (1 - ui * ui) * ui;
                J(row, o + i) += -n2 / (r * r) + 1 - 3 * ui * ui;
                ++row;
            }
            if (e + 1 < E) {
                const auto& cn = pc.el[e + 1];
                const int on = o + m;
                F(row) = x(o + deg) - x(on);
                J(row, o + deg) = 1;
                J(row, on) = -1;
                ++row;
                double d = 0;
                for (int j = 0; j < m; ++j) {
                    d += c.D(deg, j) * x(o + j) - cn.D(0, j) * x(on + j);
                    J(row, o + j) += c.D(deg, j);
                    J(row, on + j) -= cn.D(0, j);
                }
                F(row) = d;
                ++row;
            }
        }
        F(row) = x(nu - 2) - u_right;
        J(row, nu - 2) = 1;
        ++row;
        const Eigen::VectorXd dx = J.partialPivLu().solve(F);
        x -= dx;
        if (!dx.allFinite()) throw NumericalError("profile collocation diverged");
        // stop once the update reaches the round-off floor of the linear solve
        const double step = dx.lpNorm<Eigen::Infinity>();
        if (step < 1e-13 || (step < 1e-10 && step > 0.25 * prev_step)) break;
        prev_step = step;
        if (it == 39) throw NumericalError("profile collocation did not converge");
    }
    pc.a = x(nu - 1);
    pc.u.resize(E);
    pc.du.resize(E);
    for (int e = 0; e < E; ++e) {
        Eigen::VectorXd ue = x.segment(e * m, m);
        Eigen::VectorXd de = pc.el[e].D * ue;
        pc.u[e].assign(ue.data(), ue.data() + m);
        pc.du[e].assign(de.data(), de.data() + m);
    }
    return pc;
}

}  // namespace detail

// Bracketed shooting for the slope, then a collocation polish of the whole profile.
inline VortexProfile solve_profile(int n, double r_max, const Tolerance& tol = {}) {
    if (n < 1) throw ConfigError("vortex degree must be >= 1");
    if (!(r_max >= 20)) throw ConfigError("vortex r_max must be >= 20");
    tol.validate();
    VortexProfile p;
    p.degree = n;
    p.r_max = r_max;
    const Tolerance shoot_tol{std::max(tol.rel * 1e-3, 2e-14), std::max(tol.abs * 1e-3, 1e-16)};
    const double r_shoot = 60.0 + 10.0 * n;

    // initial bracket: grow until the classifications differ
    double lo = 0.05, hi = 1.5;
    using K = ShootingOutcome::Kind;
    for (int i = 0; i < 60 && shoot_profile(n, lo, r_shoot, shoot_tol).classification != K::undershoot; ++i) lo *= 0.5;
    for (int i = 0; i < 60 && shoot_profile(n, hi, r_shoot, shoot_tol).classification != K::overshoot; ++i) hi *= 2;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 5e-11; ++it) {
        mid = 0.5 * (lo + hi);
        const auto o = shoot_profile(n, mid, r_shoot, shoot_tol);
        if (o.classification == K::overshoot) hi = mid;
        else if (o.classification == K::undershoot) lo = mid;
        else {
            lo = hi = mid;
            break;
        }
    }
    p.bracket_lo = lo;
    p.bracket_hi = hi;
    p.bracket_width = hi - lo;
    p.slope = 0.5 * (lo + hi);
    if (p.bracket_width > 1e-10) throw NumericalError("bracket fails to close");

    // shooting guess on the stable part of the trajectory
    p.asym = VortexProfile::asym_coefficients(n);
    const double r_blend = 5.0 + 2.0 * n;
    const auto A0 = VortexProfile::series_coefficients(n, p.slope);
    const Pt s0 = VortexProfile::series_eval_with(A0, n, p.r_start);
    auto rhs = [n](double r, const Vec<2>& y, Vec<2>& dy) { detail::vortex_rhs(n, r, y, dy); };
    const auto tr = integrate_ode<2>(rhs, p.r_start, r_blend + 2.0, {s0.v, s0.d}, shoot_tol);
    auto asym_U = [&](double r) { return 1.0 + p.asym_w(r).first; };
    auto guess = [&](double r) {
        if (r <= r_blend) return tr(r)[0];
        if (r >= r_blend + 2) return asym_U(r);
        const double t = (r - r_blend) / 2.0, s = t * t * (3 - 2 * t);
        return (1 - s) * tr(r)[0] + s * asym_U(r);
    };
    const int deg = tol.rel < 1e-11 ? 36 : 28;
    const auto pc = detail::collocate_profile(n, p.slope, p.r_series, r_max, deg, guess, p.asym);
    if (pc.a < lo - 1e-9 || pc.a > hi + 1e-9)
        throw NumericalError("bracket fails to close: collocated slope outside the shooting bracket");
    p.series = VortexProfile::series_coefficients(n, pc.a);

    // quintic table on a uniform grid with U'' from the equation
    const double h = 0.01;
    const size_t N = size_t(std::ceil((r_max - p.r_series) / h - 1e-9)) + 1;
    p.grid = Grid::uniform(p.r_series, r_max, N);
    std::vector<double> d2(N);
    p.U.resize(N);
    p.dU.resize(N);
    const double n2 = double(n) * n;
    for (size_t i = 0; i < N; ++i) {
        const double r = p.grid[i];
        const Pt v = pc.eval(r);
        p.U[i] = v.v;
        p.dU[i] = v.d;
        d2[i] = -v.d / r + n2 * v.v / (r * r) - (1 - v.v * v.v) * v.v;
    }
    p.set_table(QuinticTable<double>(p.grid.nodes, p.U, p.dU, d2, false));
    return p;
}

}  // namespace glv
