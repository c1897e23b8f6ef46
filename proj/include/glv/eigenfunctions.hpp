#pragma once

#include <glv/zero_modes.hpp>

namespace glv {

inline constexpr int kInnerOrder = 18;

// k-independent coefficient table for the small-r expansion
//   Phi(r, k) = sum_j (-k^2)^j y_j(r),  y_0 = phi0,
//   y_j(r) = int_0^r [phi0(r) theta0(s) - theta0(r) phi0(s)] y_{j-1}(s) ds,
// carried as y_j = phi0 A_j - theta0 B_j with A_j' = theta0 y_{j-1}, B_j' = phi0 y_{j-1}.
class InnerTable {
public:
    static constexpr int J = kInnerOrder;
    using State = Vec<2 * J>;

    InnerTable(const ZeroEnergyBasis& basis, double r_end, const Tolerance& tol = {1e-12, 1e-300})
        : basis_(basis), r_end_(r_end) {
        const int n = basis.op.n;
        phi_lead_ = basis.phi_lead();
        const double th_lead = 1.0 / (2.0 * n * phi_lead_);
        alpha_[0] = 1.0;
        for (int j = 1; j <= J; ++j) alpha_[j] = alpha_[j - 1] / (4.0 * j * (j + n));
        State y0{};
        for (int j = 1; j <= J; ++j) {
            y0[j - 1] = th_lead * phi_lead_ * alpha_[j - 1] * std::pow(r_s_, 2 * j) / (2.0 * j);
            y0[J + j - 1] = phi_lead_ * phi_lead_ * alpha_[j - 1] * std::pow(r_s_, 2 * j + 2 * n) / (2.0 * j + 2 * n);
        }
        auto rhs = [this](double r, const State& y, State& dy) {
            const Pt f = basis_.phi0(r), t = basis_.theta0(r);
            double prev = f.v;
            for (int j = 1; j <= J; ++j) {
                dy[j - 1] = t.v * prev;
                dy[J + j - 1] = f.v * prev;
                prev = f.v * y[j - 1] - t.v * y[J + j - 1];
            }
        };
        OdeOptions opt;
        opt.peak_scale = true;
        traj_ = integrate_ode<2 * J>(rhs, r_s_, std::max(r_end, 2 * r_s_), y0, tol, opt);
    }

    double r_start() const { return r_s_; }
    double r_end() const { return r_end_; }
    const ZeroEnergyBasis& basis() const { return basis_; }

    // y_j and y_j' for j = 0..J at r
    void terms(double r, std::array<double, J + 1>& y, std::array<double, J + 1>& dy) const {
        const Pt f = basis_.phi0(r), t = basis_.theta0(r);
        y[0] = f.v;
        dy[0] = f.d;
        if (r < r_s_) {
            // leading power behaviour below the table start
            for (int j = 1; j <= J; ++j) {
                const double c = alpha_[j] * std::pow(r, 2 * j);
                y[j] = c * f.v;
                dy[j] = r > 0 ? c * f.d + 2.0 * j * c / r * f.v : 0.0;
            }
            return;
        }
        if (r > traj_.r_end * (1 + 1e-12)) throw NumericalError("inner table evaluated beyond its range");
        const State s = traj_(std::min(r, traj_.r_end));
        for (int j = 1; j <= J; ++j) {
            y[j] = f.v * s[j - 1] - t.v * s[J + j - 1];
            dy[j] = f.d * s[j - 1] - t.d * s[J + j - 1];
        }
    }

    // f_j = y_j / sqrt(r)
    double f(int j, double r) const {
        std::array<double, J + 1> y, dy;
        terms(r, y, dy);
        return y[j] / std::sqrt(r);
    }

private:
    ZeroEnergyBasis basis_;
    double r_end_;
    double r_s_ = 1e-3;
    double phi_lead_ = 1;
    std::array<double, J + 1> alpha_{};
    Trajectory<2 * J> traj_;
};

// Inner series at a fixed k.
struct InnerSeries {
    Operator op;
    double k = 0;
    double c_match = 0.5;
    int order = 0;  // number of terms needed on r <= c_match / k
    std::shared_ptr<const InnerTable> table;

    double f(int j, double r) const { return table->f(j, r); }

    Pt eval(double r) const {
        std::array<double, InnerTable::J + 1> y, dy;
        table->terms(r, y, dy);
        const double mk2 = -k * k;
        double v = 0, d = 0, p = 1;
        for (int j = 0; j <= InnerTable::J; ++j) {
            v += p * y[j];
            d += p * dy[j];
            p *= mk2;
            if (p == 0) break;
        }
        return {v, d};
    }
};

inline int inner_order_for(double kr, double tol) {
    // factorial tail bound (kr)^{2j} / (4^j j! (j+1)!)
    double t = 1;
    for (int j = 1; j <= InnerTable::J; ++j) {
        t *= kr * kr / (4.0 * j * (j + 1));
        if (t < tol) return j;
    }
    return InnerTable::J;
}

inline InnerSeries inner_series(const ZeroEnergyBasis& basis, double k, double c_match = 0.5,
                                const Tolerance& tol = {}) {
    if (!(k >= 0)) throw ConfigError("inner_series requires k >= 0");
    if (!(c_match > 0.3 && c_match <= 0.6)) throw ConfigError("c_match must lie in (0.3, 0.6]");
    const double r_end = k > 0 ? std::min(1.05 * 0.6 / k, 2e3) : 10.0;
    InnerSeries s;
    s.op = basis.op;
    s.k = k;
    s.c_match = c_match;
    s.order = inner_order_for(c_match, tol.rel * 1e-2);
    s.table = std::make_shared<const InnerTable>(basis, r_end);
    return s;
}

// ---------------------------------------------------------------------------
// Weyl solution Psi = k^{-1/2} e^{ikr} sigma(r), sigma'' + 2ik sigma' = Q sigma, sigma -> 1.

// Laurent coefficients of the formal solution sigma = sum_j k^{-j} w_j(r), w_j = sum_l w[j][l] r^{-l}.
struct WeylSeries {
    Operator op;
    std::vector<std::vector<cplx>> w;
    static constexpr int L = 60;

    WeylSeries() = default;
    WeylSeries(const Operator& o, const VortexProfile& p, int jmax = 12) : op(o) {
        // Q = sum_m q[2m] r^{-2m}
        std::vector<double> q(L + 1, 0.0);
        const auto& u = p.asym;
        const int mmax = std::min<int>(int(u.size()) - 1, 10);
        for (int m = 1; m <= mmax && 2 * m <= L; ++m) {
            double pm = -2.0 * u[m];
            for (int i = 1; i < m; ++i) pm -= u[i] * u[m - i];
            q[2 * m] = -o.kappa() * pm;
        }
        q[2] += double(o.n) * o.n - 0.25;
        const cplx ih(0.0, 0.5);
        w.assign(jmax + 1, std::vector<cplx>(L + 1, 0.0));
        w[0][0] = 1.0;
        for (int j = 1; j <= jmax; ++j) {
            const auto& prev = w[j - 1];
            auto& cur = w[j];
            for (int l = 0; l < L; ++l) cur[l + 1] += ih * (-double(l)) * prev[l];
            std::vector<cplx> qw(L + 1, 0.0);
            for (int a = 2; a <= L; a += 2)
                if (q[a] != 0)
                    for (int b = 0; a + b <= L; ++b) qw[a + b] += q[a] * prev[b];
            for (int l = 2; l <= L; ++l) cur[l - 1] += ih * qw[l] / double(l - 1);
        }
    }

    // sigma and sigma' at r from terms j <= j0
    std::pair<cplx, cplx> eval(double k, double r, int j0) const {
        cplx s = 0, ds = 0;
        double kp = 1;
        for (int j = 0; j <= j0 && j < int(w.size()); ++j) {
            cplx v = 0, dv = 0;
            double rp = 1;
            for (int l = 0; l <= L; ++l) {
                if (w[j][l] != 0.0) {
                    v += w[j][l] * rp;
                    dv += -double(l) * w[j][l] * rp / r;
                }
                rp /= r;
                if (rp < 1e-300) break;
            }
            s += v * kp;
            ds += dv * kp;
            kp /= k;
        }
        return {s, ds};
    }
};

struct WeylOptions {
    int j0 = 8;
    double q_init = 40;   // R_init >= q_init / k
    double r_floor = 40;  // R_init >= r_floor
};

class WeylSolution {
public:
    Operator op;
    double k = 0;
    double r_eval = 0;
    double R_init = 0;
    int j0 = 0;

    WeylSolution() = default;
    WeylSolution(const Operator& o, const VortexProfile& p, std::shared_ptr<const WeylSeries> series, double kk,
                 double r_ev, const Tolerance& tol, const WeylOptions& wo = {})
        : op(o), k(kk), r_eval(r_ev), j0(wo.j0), series_(std::move(series)) {
        if (!(k > 0)) throw ConfigError("Weyl solution requires k > 0");
        R_init = std::max({r_eval, wo.q_init / k, wo.r_floor});
        const auto [s, ds] = series_->eval(k, R_init, j0);
        const Vec<4> y0{s.real(), s.imag(), ds.real(), ds.imag()};
        const double kk2 = 2 * k;
        auto rhs = [&p, o, kk2](double r, const Vec<4>& y, Vec<4>& dy) {
            const double Q = o.Q(p, r);
            dy[0] = y[2];
            dy[1] = y[3];
            dy[2] = Q * y[0] + kk2 * y[3];
            dy[3] = Q * y[1] - kk2 * y[2];
        };
        if (r_eval < R_init) traj_ = integrate_ode<4>(rhs, R_init, r_eval, y0, tol);
        else {
            traj_.r_begin = traj_.r_end = R_init;
            traj_.y_end = y0;
        }
    }

    // sigma, sigma'
    std::pair<cplx, cplx> sigma(double r) const {
        if (r >= R_init) return series_->eval(k, r, j0);
        if (r < r_eval * (1 - 1e-12)) throw NumericalError("Weyl solution evaluated inside its start radius");
        const auto y = traj_(std::max(r, traj_.r_end));
        return {cplx(y[0], y[1]), cplx(y[2], y[3])};
    }

    // Psi, Psi'
    std::pair<cplx, cplx> psi(double r) const {
        const auto [s, ds] = sigma(r);
        const cplx e = std::exp(cplx(0.0, k * r)) / std::sqrt(k);
        return {e * s, e * (cplx(0.0, k) * s + ds)};
    }

    // W(conj Psi, Psi) = 2i |sigma|^2 + (2i/k) Im(conj(sigma) sigma')
    cplx wronskian_bar(double r) const {
        const auto [s, ds] = sigma(r);
        return cplx(0.0, 2.0) * (std::norm(s) + std::imag(std::conj(s) * ds) / k);
    }

    size_t steps() const { return traj_.n_steps; }

private:
    std::shared_ptr<const WeylSeries> series_;
    Trajectory<4> traj_;
};

inline WeylSolution weyl_solution(const Operator& op, const VortexProfile& p, double k, double r_eval,
                                  const Tolerance& tol = {1e-11, 1e-13}, const WeylOptions& wo = {}) {
    if (!(k > 0)) throw ConfigError("weyl_solution requires k > 0");
    if (r_eval * k < 0.3 - 1e-12 && r_eval > 1.5e-3)
        throw NumericalError("r_eval too small: the inner series must be used for r k < 0.3");
    return WeylSolution(op, p, std::make_shared<const WeylSeries>(op, p, std::max(wo.j0, 2)), k, r_eval, tol, wo);
}

// ---------------------------------------------------------------------------
// Global eigenfunction at fixed k

struct Eigenfunction {
    Operator op;
    double k = 0;
    double c_match = 0.5;
    InnerSeries inner;
    WeylSolution outer;
    cplx a_conn = 0;
    double spread = 0;  // relative spread of the Wronskian evaluations

    Pt eval(double r) const {
        if (k == 0 || r * k <= c_match) return inner.eval(r);
        const auto [p, dp] = outer.psi(r);
        return {2.0 * std::real(a_conn * p), 2.0 * std::real(a_conn * dp)};
    }
    bool inner_region(double r) const { return k == 0 || r * k <= c_match; }
};

// Shared state for repeated eigenfunction work on one operator.
class SpectralContext {
public:
    SpectralContext(const ZeroEnergyBasis& basis, double k_min, double c_match = 0.5, const Tolerance& tol = {},
                    const WeylOptions& wo = {})
        : basis_(basis), c_match_(c_match), tol_(tol), wo_(wo) {
        if (!(c_match > 0.3 && c_match <= 0.6)) throw ConfigError("c_match must lie in (0.3, 0.6]");
        if (!(k_min > 0)) throw ConfigError("k_min must be positive");
        k_min_ = k_min;
        const double r_end = std::max(1.05 * std::max(0.6, c_match) / k_min, 1.0);
        table_ = std::make_shared<const InnerTable>(basis, r_end);
        series_ = std::make_shared<const WeylSeries>(basis.op, basis.profile(), std::max(wo.j0, 2));
    }

    const Operator& op() const { return basis_.op; }
    const ZeroEnergyBasis& basis() const { return basis_; }
    const VortexProfile& profile() const { return basis_.profile(); }
    double c_match() const { return c_match_; }
    double k_min() const { return k_min_; }
    std::shared_ptr<const InnerTable> table() const { return table_; }

    InnerSeries inner(double k) const {
        InnerSeries s;
        s.op = basis_.op;
        s.k = k;
        s.c_match = c_match_;
        s.order = inner_order_for(c_match_, tol_.rel * 1e-2);
        s.table = table_;
        return s;
    }

    // r_far: start the inward integration at least this far out so evaluations up to r_far use dense output
    WeylSolution weyl(double k, double r_eval, double r_far = 0) const {
        WeylOptions wo = wo_;
        wo.r_floor = std::max(wo.r_floor, r_far);
        return WeylSolution(basis_.op, basis_.profile(), series_, k, r_eval, weyl_tol(), wo);
    }

    // evaluation radii for the connection coefficient, kept inside the inner table
    std::array<double, 3> wronskian_radii(double k) const {
        std::array<double, 3> r{0.4 / k, 0.5 / k, 0.6 / k};
        const double lo = 1.5 * table_->r_start();
        for (auto& x : r) x = std::max(x, lo + (x - 0.4 / k));
        return r;
    }

    // a = (i/2) W(Phi, conj Psi), averaged over three radii; spread checked against 1e-5
    std::pair<cplx, double> connection(double k, const InnerSeries& in, const WeylSolution& out) const {
        const auto radii = wronskian_radii(k);
        std::array<cplx, 3> v{};
        for (int i = 0; i < 3; ++i) {
            const Pt f = in.eval(radii[i]);
            const auto [p, dp] = out.psi(radii[i]);
            const cplx W = f.v * std::conj(dp) - f.d * std::conj(p);
            v[i] = cplx(0.0, 0.5) * W;
        }
        const cplx mean = (v[0] + v[1] + v[2]) / 3.0;
        double spread = 0;
        for (const auto& x : v) spread = std::max(spread, std::abs(x - mean) / std::abs(mean));
        return {mean, spread};
    }

    Eigenfunction eigenfunction(double k, double r_far = 0) const {
        if (!(k > 0)) throw ConfigError("eigenfunction requires k > 0");
        if (k < k_min_ * (1 - 1e-12)) throw ConfigError("k below the context's k_min");
        Eigenfunction e;
        e.op = basis_.op;
        e.k = k;
        e.c_match = c_match_;
        e.inner = inner(k);
        const auto radii = wronskian_radii(k);
        e.outer = weyl(k, std::min(radii[0], c_match_ / k), r_far);
        const auto [a, s] = connection(k, e.inner, e.outer);
        e.a_conn = a;
        e.spread = s;
        if (s > 1e-5)
            throw NumericalError("connection coefficient inconsistent across evaluation radii at k=" +
                                 std::to_string(k) + " (spread " + std::to_string(s) + ")");
        return e;
    }

    Tolerance weyl_tol() const { return {std::min(1e-11, tol_.rel * 0.1), 1e-13}; }

private:
    ZeroEnergyBasis basis_;
    double c_match_;
    double k_min_ = 0;
    Tolerance tol_;
    WeylOptions wo_;
    std::shared_ptr<const InnerTable> table_;
    std::shared_ptr<const WeylSeries> series_;
};

// One-off evaluation of Phi(r, k); builds its own tables.
inline Pt phi_global(const ZeroEnergyBasis& basis, double r, double k, double c_match = 0.5) {
    if (r < 0 || k < 0) throw ConfigError("phi_global requires r >= 0 and k >= 0");
    if (k == 0) return basis.phi0(r);
    SpectralContext ctx(basis, k, c_match);
    return ctx.eigenfunction(k).eval(r);
}

}  // namespace glv
