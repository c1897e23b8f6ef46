#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace glv {

using cplx = std::complex<double>;

// Raised when a numerical procedure cannot meet its contract.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised for invalid user-supplied configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Tolerance {
    double rel = 1e-10;
    double abs = 1e-12;

    void validate() const {
        if (!(rel > 0 && rel <= 1e-2 && abs >= 0))
            throw ConfigError("tolerance requires 0 < rel <= 1e-2 and abs >= 0");
    }
    Tolerance scaled(double f) const { return {rel * f, abs * f}; }
};

// Value and radial derivative of a real function at a point.
struct Pt {
    double v = 0;
    double d = 0;
};

// ---------------------------------------------------------------------------
// Grids

struct Grid {
    enum class Kind { uniform, log_uniform, composite };

    std::vector<double> nodes;
    std::vector<double> weights;  // quadrature weights over [nodes.front(), nodes.back()] or panels
    Kind kind = Kind::composite;

    size_t size() const { return nodes.size(); }
    double operator[](size_t i) const { return nodes[i]; }

    void validate() const {
        if (nodes.size() < 2) throw ConfigError("grid needs at least 2 nodes");
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (!std::isfinite(nodes[i]) || nodes[i] < 0) throw ConfigError("grid nodes must be finite and >= 0");
            if (i > 0 && !(nodes[i] > nodes[i - 1])) throw ConfigError("grid nodes must be strictly increasing");
        }
        if (!weights.empty() && weights.size() != nodes.size()) throw ConfigError("grid weights size mismatch");
    }

    static Grid uniform(double a, double b, size_t n) {
        if (n < 2 || !(b > a)) throw ConfigError("uniform grid needs n >= 2 and b > a");
        Grid g;
        g.kind = Kind::uniform;
        g.nodes.resize(n);
        for (size_t i = 0; i < n; ++i) g.nodes[i] = a + (b - a) * double(i) / double(n - 1);
        g.nodes.back() = b;
        g.weights = trapezoid(g.nodes);
        g.validate();
        return g;
    }

    static Grid log_uniform(double a, double b, size_t n) {
        if (n < 2 || !(a > 0) || !(b > a)) throw ConfigError("log grid needs n >= 2 and 0 < a < b");
        Grid g;
        g.kind = Kind::log_uniform;
        g.nodes.resize(n);
        const double la = std::log(a), lb = std::log(b);
        for (size_t i = 0; i < n; ++i) g.nodes[i] = std::exp(la + (lb - la) * double(i) / double(n - 1));
        g.nodes.front() = a;
        g.nodes.back() = b;
        g.weights = trapezoid(g.nodes);
        g.validate();
        return g;
    }

    // 8-point Gauss-Legendre on each panel [edges[i], edges[i+1]].
    static Grid gauss_panels(const std::vector<double>& edges) {
        const auto& x = boost::math::quadrature::gauss<double, 8>::abscissa();
        const auto& w = boost::math::quadrature::gauss<double, 8>::weights();
        Grid g;
        g.kind = Kind::composite;
        for (size_t p = 0; p + 1 < edges.size(); ++p) {
            const double a = edges[p], b = edges[p + 1];
            if (!(b > a)) throw ConfigError("panel edges must increase");
            const double c = 0.5 * (a + b), h = 0.5 * (b - a);
            for (int i = int(x.size()) - 1; i >= 0; --i) {
                g.nodes.push_back(c - h * x[i]);
                g.weights.push_back(h * w[i]);
            }
            for (size_t i = 0; i < x.size(); ++i) {
                g.nodes.push_back(c + h * x[i]);
                g.weights.push_back(h * w[i]);
            }
        }
        g.validate();
        return g;
    }

    static std::vector<double> trapezoid(const std::vector<double>& x) {
        std::vector<double> w(x.size(), 0.0);
        for (size_t i = 0; i + 1 < x.size(); ++i) {
            const double h = x[i + 1] - x[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        return w;
    }
};

// Panel edges on [0, b] with width at most h, geometrically refined towards 0.
inline std::vector<double> panel_edges(double b, double h, int refine0 = 3) {
    std::vector<double> e{0.0};
    const double h0 = std::min(h, b);
    for (int i = refine0; i >= 1; --i) e.push_back(h0 * std::ldexp(1.0, -i));
    const int n = std::max(1, int(std::ceil((b - h0) / h - 1e-12)));
    e.push_back(h0);
    if (b > h0)
        for (int i = 1; i <= n; ++i) e.push_back(h0 + (b - h0) * double(i) / double(n));
    return e;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with dense output

template <size_t N>
using Vec = std::array<double, N>;

struct OdeOptions {
    double h_init = 0;   // 0: automatic
    double h_max = 0;    // 0: unbounded
    size_t max_steps = 20'000'000;
    bool dense = true;   // keep every step for evaluation anywhere in the span
    bool peak_scale = false;  // error relative to the running peak of each component
};

template <size_t N>
struct DenseStep {
    double x0 = 0, h = 0;
    std::array<Vec<N>, 5> rc{};

    Vec<N> eval(double x) const {
        const double th = (x - x0) / h, th1 = 1.0 - th;
        Vec<N> y;
        for (size_t i = 0; i < N; ++i)
            y[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
        return y;
    }
};

template <size_t N>
class Trajectory {
public:
    double r_begin = 0, r_end = 0;
    Vec<N> y_end{};
    std::vector<DenseStep<N>> steps;
    size_t n_steps = 0;

    bool contains(double r) const {
        const double lo = std::min(r_begin, r_end), hi = std::max(r_begin, r_end);
        return r >= lo && r <= hi;
    }

    Vec<N> operator()(double r) const {
        if (steps.empty()) throw NumericalError("trajectory has no dense output");
        const bool fwd = r_end >= r_begin;
        // steps are ordered along the direction of integration
        size_t lo = 0, hi = steps.size();
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            if (fwd ? (steps[mid].x0 <= r) : (steps[mid].x0 >= r)) lo = mid;
            else hi = mid;
        }
        return steps[lo].eval(r);
    }
};

namespace detail {

template <size_t N>
double err_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& peak, const Tolerance& tol) {
    double e = 0;
    for (size_t i = 0; i < N; ++i) {
        const double sc = tol.abs + tol.rel * std::max({std::abs(y0[i]), std::abs(y1[i]), peak[i]});
        e = std::max(e, std::abs(err[i]) / (sc > 0 ? sc : 1e-300));
    }
    return e;
}

}  // namespace detail

// Integrates y' = f(r, y) from r0 to r1 (either direction). on_step(step, y1) is called after
// each accepted step and may return false to stop early.
template <size_t N, class Rhs, class OnStep>
Trajectory<N> integrate_ode(Rhs&& f, double r0, double r1, const Vec<N>& y0, const Tolerance& tol,
                            const OdeOptions& opt, OnStep&& on_step) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    Trajectory<N> tr;
    tr.r_begin = r0;
    tr.r_end = r0;
    tr.y_end = y0;
    if (r1 == r0) return tr;
    const double dir = r1 > r0 ? 1.0 : -1.0;
    const double span = std::abs(r1 - r0);

    Vec<N> y = y0, k1, k2, k3, k4, k5, k6, k7, yt, y1, err, peak{};
    for (size_t i = 0; i < N; ++i) peak[i] = opt.peak_scale ? std::abs(y0[i]) : 0.0;
    double x = r0;
    f(x, y, k1);

    double h = opt.h_init;
    if (h <= 0) {
        double d0 = 0, dd = 0;
        for (size_t i = 0; i < N; ++i) {
            const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), peak[i]);
            const double s = sc > 0 ? sc : 1e-300;
            d0 = std::max(d0, std::abs(y[i]) / s);
            dd = std::max(dd, std::abs(k1[i]) / s);
        }
        h = (d0 < 1e-5 || dd < 1e-5) ? 1e-6 * std::max(1.0, span) : 0.01 * d0 / dd;
        h = std::min(h, span);
    }
    if (opt.h_max > 0) h = std::min(h, opt.h_max);

    size_t nsteps = 0;
    bool last = false;
    while (!last) {
        if (++nsteps > opt.max_steps)
            throw NumericalError("ODE step budget exhausted at r=" + std::to_string(x));
        if (h >= std::abs(r1 - x)) {
            h = std::abs(r1 - x);
            last = true;
        }
        const double hs = dir * h;
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * a21 * k1[i];
        f(x + c2 * hs, yt, k2);
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(x + c3 * hs, yt, k3);
        for (size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(x + c4 * hs, yt, k4);
        for (size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(x + c5 * hs, yt, k5);
        for (size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double xn = last ? r1 : x + hs;
        f(xn, yt, k6);
        for (size_t i = 0; i < N; ++i)
            y1[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(xn, y1, k7);
        for (size_t i = 0; i < N; ++i)
            err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

        double en = detail::err_norm<N>(err, y, y1, peak, tol);
        for (size_t i = 0; i < N; ++i)
            if (!std::isfinite(y1[i]) || !std::isfinite(err[i])) en = 1e10;
        if (!std::isfinite(en)) en = 1e10;
        if (en <= 1.0) {
            DenseStep<N> st;
            st.x0 = x;
            st.h = hs;
            for (size_t i = 0; i < N; ++i) {
                const double yd = y1[i] - y[i];
                const double bs = hs * k1[i] - yd;
                st.rc[0][i] = y[i];
                st.rc[1][i] = yd;
                st.rc[2][i] = bs;
                st.rc[3][i] = yd - hs * k7[i] - bs;
                st.rc[4][i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            x = xn;
            y = y1;
            k1 = k7;
            if (opt.peak_scale)
                for (size_t i = 0; i < N; ++i) peak[i] = std::max(peak[i], std::abs(y[i]));
            tr.n_steps++;
            const bool go_on = on_step(st, y);
            if (opt.dense) tr.steps.push_back(st);
            if (!go_on) break;
            const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-12), -0.2)));
            h *= fac;
            if (opt.h_max > 0) h = std::min(h, opt.h_max);
        } else {
            last = false;
            h *= std::max(0.1, 0.9 * std::pow(en, -0.2));
            if (h < 1e-14 * std::max(1.0, std::abs(x)))
                throw NumericalError("ODE step-size underflow at r=" + std::to_string(x));
        }
    }
    tr.r_end = x;
    tr.y_end = y;
    return tr;
}

template <size_t N, class Rhs>
Trajectory<N> integrate_ode(Rhs&& f, double r0, double r1, const Vec<N>& y0, const Tolerance& tol,
                            const OdeOptions& opt = {}) {
    return integrate_ode<N>(std::forward<Rhs>(f), r0, r1, y0, tol, opt,
                            [](const DenseStep<N>&, const Vec<N>&) { return true; });
}

// ---------------------------------------------------------------------------
// Quadrature

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double mag(double x) { return std::abs(x); }
inline double mag(const cplx& z) { return std::abs(z); }

template <class T>
struct Segment {
    double a, b;
    T val;
    double err;
    bool operator<(const Segment& o) const { return err < o.err; }
};

template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T rk = fc * kWgk[7];
    T rg = fc * kWg[3];
    double rabs = mag(fc) * kWgk[7];
    std::array<T, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        rk += kWgk[j] * (f1[j] + f2[j]);
        rabs += kWgk[j] * (mag(f1[j]) + mag(f2[j]));
        if (j % 2 == 1) rg += kWg[j / 2] * (f1[j] + f2[j]);
    }
    const T mean = rk * 0.5;
    double rasc = kWgk[7] * mag(fc - mean);
    for (int j = 0; j < 7; ++j) rasc += kWgk[j] * (mag(f1[j] - mean) + mag(f2[j] - mean));
    rasc *= std::abs(h);
    double err = mag((rk - rg) * h);
    if (rasc != 0 && err != 0) err = rasc * std::min(1.0, std::pow(200.0 * err / rasc, 1.5));
    const double resabs = rabs * std::abs(h);
    if (resabs > 1e-290) err = std::max(err, 50 * 2.2e-16 * resabs);
    return {a, b, rk * h, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 7/15: the worst panel is bisected until the summed error
// estimate falls below tol*(1+|I|). Endpoint singularities get graded automatically.
template <class F>
auto quad_adaptive(F&& f, double a, double b, double tol, size_t max_segments = 4000) {
    using T = decltype(f(a));
    if (a == b) return T{};
    std::priority_queue<detail::Segment<T>> heap;
    auto s0 = detail::gk15<T>(f, a, b);
    T total = s0.val;
    double err = s0.err;
    heap.push(s0);
    while (err > tol * (1.0 + detail::mag(total))) {
        if (heap.size() >= max_segments)
            throw NumericalError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                                 std::to_string(b) + "]");
        auto s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        if (!(std::abs(s.b - s.a) > 4e-16 * std::max(std::abs(s.a), std::abs(s.b)) + 1e-280)) {
            if (s.err > tol * (1.0 + detail::mag(total)))
                throw NumericalError("adaptive quadrature hit interval resolution at x=" + std::to_string(m));
            heap.push(s);
            break;
        }
        auto l = detail::gk15<T>(f, s.a, m);
        auto r = detail::gk15<T>(f, m, s.b);
        total += l.val + r.val - s.val;
        err += l.err + r.err - s.err;
        heap.push(l);
        heap.push(r);
    }
    // re-sum to limit drift from incremental updates
    T sum{};
    while (!heap.empty()) {
        sum += heap.top().val;
        heap.pop();
    }
    return sum;
}

// Integral over [a, inf): adaptive on [a, R] plus a caller-supplied analytic tail from R.
template <class F>
double quad_semi_infinite(F&& f, double a, double R, double tail, double tol) {
    return quad_adaptive(std::forward<F>(f), a, R, tol) + tail;
}

// ∫_a^b A(k) e^{i phi(k)} dk with panels no longer than half the local wavelength.
template <class FA, class FP, class FD>
cplx quad_oscillatory(FA&& amp, FP&& phase, FD&& dphase, double a, double b, double tol,
                      size_t max_panels = 200000) {
    if (a == b) return 0.0;
    const double sgn = b > a ? 1.0 : -1.0;
    const double len = std::abs(b - a);
    cplx sum = 0.0;
    double x = a;
    size_t panels = 0;
    auto integrand = [&](double k) { return cplx(amp(k)) * std::exp(cplx(0.0, phase(k))); };
    while (sgn * (b - x) > 0) {
        if (++panels > max_panels) throw NumericalError("oscillatory quadrature: resolution budget exceeded");
        const double w = std::abs(dphase(x));
        double L = w > 0 ? M_PI / w : len;
        L = std::min(L, sgn * (b - x));
        const double xn = (sgn * (b - (x + sgn * L)) < 1e-14 * len) ? b : x + sgn * L;
        try {
            sum += quad_adaptive(integrand, x, xn, tol / 4);
        } catch (const NumericalError&) {
            const bool edge = (x == a || xn == b);
            if (edge && std::abs(dphase(x == a ? a : b)) < 1e-12)
                throw NumericalError("oscillatory quadrature: unresolved stationary point at domain edge");
            throw;
        }
        x = xn;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Root finding

// Root of f in [a, b] with f(a) f(b) < 0; bracket refined (TOMS 748) to width <= tol.
template <class F>
double find_root_bracketed(F&& f, double a, double b, double tol) {
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (!(fa * fb < 0)) throw NumericalError("find_root_bracketed: no sign change in bracket");
    boost::uintmax_t it = 200;
    auto stop = [tol](double lo, double hi) { return std::abs(hi - lo) <= tol; };
    auto res = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, it);
    if (std::abs(res.second - res.first) > tol) throw NumericalError("find_root_bracketed: bracket did not close");
    return 0.5 * (res.first + res.second);
}

// ---------------------------------------------------------------------------
// Quintic Hermite tables (value, first and second derivative at nodes)

template <class T>
class QuinticTable {
public:
    QuinticTable() = default;

    // Nodes must be uniform in x (log_spacing=false) or in ln x (log_spacing=true).
    QuinticTable(std::vector<double> x, std::vector<T> f, std::vector<T> d1, std::vector<T> d2, bool log_spacing)
        : x_(std::move(x)), f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)), log_(log_spacing) {
        if (x_.size() < 2) throw NumericalError("QuinticTable needs two nodes");
        u0_ = log_ ? std::log(x_.front()) : x_.front();
        du_ = ((log_ ? std::log(x_.back()) : x_.back()) - u0_) / double(x_.size() - 1);
    }

    bool empty() const { return x_.empty(); }
    double lo() const { return x_.front(); }
    double hi() const { return x_.back(); }

    // Returns value and first derivative.
    std::pair<T, T> eval(double x) const {
        const double u = log_ ? std::log(x) : x;
        long i = long((u - u0_) / du_);
        i = std::clamp(i, 0L, long(x_.size()) - 2);
        if (x < x_[i] && i > 0) --i;
        if (x > x_[i + 1] && i + 2 < long(x_.size())) ++i;
        const double xa = x_[i], h = x_[i + 1] - xa, t = (x - xa) / h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5,
                     h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), h5 = 10 * t3 - 15 * t4 + 6 * t5,
                     h4 = -4 * t3 + 7 * t4 - 3 * t5, h3 = 0.5 * (t3 - 2 * t4 + t5);
        const double g0 = -30 * t2 + 60 * t3 - 30 * t4, g1 = 1 - 18 * t2 + 32 * t3 - 15 * t4,
                     g2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4), g5 = 30 * t2 - 60 * t3 + 30 * t4,
                     g4 = -12 * t2 + 28 * t3 - 15 * t4, g3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
        const T v = f_[i] * h0 + d1_[i] * (h * h1) + d2_[i] * (h * h * h2) + f_[i + 1] * h5 +
                    d1_[i + 1] * (h * h4) + d2_[i + 1] * (h * h * h3);
        const T dv = (f_[i] * g0 + f_[i + 1] * g5) / h + d1_[i] * g1 + d1_[i + 1] * g4 +
                     (d2_[i] * g2 + d2_[i + 1] * g3) * h;
        return {v, dv};
    }

private:
    std::vector<double> x_;
    std::vector<T> f_, d1_, d2_;
    bool log_ = false;
    double u0_ = 0, du_ = 1;
};

// ---------------------------------------------------------------------------
// Chebyshev-Gauss-Lobatto tools on [a, b], nodes ascending

struct Chebyshev {
    int n = 0;  // polynomial degree; n+1 nodes
    double a = -1, b = 1;
    std::vector<double> x;
    Eigen::MatrixXd D;    // d/dx
    Eigen::MatrixXd Q;    // cumulative integral from a

    Chebyshev() = default;
    Chebyshev(int deg, double lo, double hi) : n(deg), a(lo), b(hi) {
        const int m = n + 1;
        x.resize(m);
        std::vector<double> t(m);
        for (int j = 0; j < m; ++j) {
            t[j] = -std::cos(M_PI * j / n);
            x[j] = 0.5 * (a + b) + 0.5 * (b - a) * t[j];
        }
        // differentiation matrix (ascending nodes)
        D.resize(m, m);
        std::vector<double> c(m, 1.0);
        c[0] = c[n] = 2.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                if (i == j) continue;
                const double s = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                D(i, j) = (c[i] / c[j]) * s / (t[i] - t[j]);
            }
        for (int i = 0; i < m; ++i) {
            double s = 0;
            for (int j = 0; j < m; ++j)
                if (j != i) s += D(i, j);
            D(i, i) = -s;
        }
        D *= 2.0 / (b - a);
        // cumulative integration via coefficient space
        Eigen::MatrixXd V(m, m);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) V(j, k) = std::cos(k * std::acos(std::clamp(t[j], -1.0, 1.0)));
        Eigen::MatrixXd Vi = V.inverse();
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + 1, m);  // coefficients of antiderivative
        for (int k = 0; k < m; ++k) {
            if (k == 0) B(1, 0) += 1.0;
            else if (k == 1) B(2, 1) += 0.25, B(0, 1) -= 0.25;  // constant fixed below
            else {
                B(k + 1, k) += 1.0 / (2.0 * (k + 1));
                B(k - 1, k) -= 1.0 / (2.0 * (k - 1));
            }
        }
        Eigen::MatrixXd Vx(m, m + 1), v0(1, m + 1);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k <= m; ++k) Vx(j, k) = std::cos(k * std::acos(std::clamp(t[j], -1.0, 1.0)));
        for (int k = 0; k <= m; ++k) v0(0, k) = (k % 2 == 0) ? 1.0 : -1.0;
        Eigen::MatrixXd I = Vx * B - Eigen::MatrixXd::Ones(m, 1) * (v0 * B);
        Q = 0.5 * (b - a) * I * Vi;
    }

    // Barycentric interpolation of nodal values (and derivative values, if given) at y.
    double interp(const std::vector<double>& f, double y) const {
        const int m = n + 1;
        double num = 0, den = 0;
        for (int j = 0; j < m; ++j) {
            const double d = y - x[j];
            if (d == 0) return f[j];
            double w = ((j % 2) ? -1.0 : 1.0) / d;
            if (j == 0 || j == n) w *= 0.5;
            num += w * f[j];
            den += w;
        }
        return num / den;
    }
};

// ---------------------------------------------------------------------------
// Threads

inline unsigned resolve_threads(int requested) {
    if (requested > 0) return unsigned(requested);
    if (const char* env = std::getenv("VORTEX_SPECTRAL_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return unsigned(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1u;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(n ? n : 1)));
    if (threads == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace glv
