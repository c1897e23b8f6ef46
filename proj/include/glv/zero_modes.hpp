#pragma once

#include <glv/operators.hpp>

#include <limits>
#include <memory>
#include <optional>

namespace glv {

namespace detail {

// Solutions at large r written as sqrt(r) (Y0(t) + E(t)), t = ln r, where E solves the Volterra
// equation from infinity for Y'' + w^2 Y = -W Y with W = 3 (r^2 (1-U^2) - n^2).
struct OuterPair {
    double omega = 0;
    double t0 = 0, t1 = 0;
    Chebyshev cheb;
    std::vector<double> e1, de1, e2, de2;  // E and dE/dt for Y0 = cos(wt) and Y0 = -sin(wt)/w

    // (y, dy/dr) of the first (k=0) or second (k=1) outer solution at r in [e^t0, e^t1]
    Pt eval(int k, double r) const {
        const double t = std::log(r);
        const double w = omega, c = std::cos(w * t), s = std::sin(w * t);
        double Y, dY;
        if (k == 0) {
            Y = c + cheb.interp(e1, t);
            dY = -w * s + cheb.interp(de1, t);
        } else {
            Y = -s / w + cheb.interp(e2, t);
            dY = -c + cheb.interp(de2, t);
        }
        const double sr = std::sqrt(r);
        return {sr * Y, (dY + 0.5 * Y) / sr};
    }
};

inline OuterPair outer_volterra(const VortexProfile& p, int n, double r_anchor, double r_inf, int deg = 48) {
    OuterPair op;
    const double w = double(n) * std::sqrt(2.0);
    op.omega = w;
    op.t0 = std::log(r_anchor);
    op.t1 = std::log(r_inf);
    op.cheb = Chebyshev(deg, op.t0, op.t1);
    const auto& c = op.cheb;
    const int m = deg + 1;
    auto W = [&](double t) {
        const double r = std::exp(t);
        return 3.0 * (r * r * p.one_minus_U2(r) - double(n) * n);
    };
    std::vector<double> Wn(m);
    for (int i = 0; i < m; ++i) Wn[i] = W(c.x[i]);

    for (int k = 0; k < 2; ++k) {
        auto Y0 = [&](double t) { return k == 0 ? std::cos(w * t) : -std::sin(w * t) / w; };
        // first-order contribution of (T1, infinity); W decays like e^{-2t}
        const double Ct = quad_adaptive([&](double u) { return std::cos(w * u) * W(u) * Y0(u); }, op.t1, op.t1 + 25, 1e-14);
        const double St = quad_adaptive([&](double u) { return std::sin(w * u) * W(u) * Y0(u); }, op.t1, op.t1 + 25, 1e-14);
        Eigen::VectorXd E = Eigen::VectorXd::Zero(m), dE(m);
        double prev = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
            Eigen::VectorXd hc(m), hs(m);
            for (int i = 0; i < m; ++i) {
                const double h = Wn[i] * (Y0(c.x[i]) + E(i));
                hc(i) = std::cos(w * c.x[i]) * h;
                hs(i) = std::sin(w * c.x[i]) * h;
            }
            const Eigen::VectorXd qc = c.Q * hc, qs = c.Q * hs;
            Eigen::VectorXd En(m);
            for (int i = 0; i < m; ++i) {
                const double Ci = qc(m - 1) - qc(i) + Ct, Si = qs(m - 1) - qs(i) + St;
                const double ct = std::cos(w * c.x[i]), st = std::sin(w * c.x[i]);
                En(i) = (st * Ci - ct * Si) / w;
                dE(i) = ct * Ci + st * Si;
            }
            const double diff = (En - E).lpNorm<Eigen::Infinity>();
            E = En;
            if (diff < 1e-14) {
                converged = true;
                break;
            }
            if (it > 3 && diff > 0.9 * prev)
                throw NumericalError("Picard iteration fails to contract on the outer region (anchor too small)");
            prev = diff;
        }
        if (!converged) throw NumericalError("Picard iteration fails to contract on the outer region");
        auto& e = k == 0 ? op.e1 : op.e2;
        auto& de = k == 0 ? op.de1 : op.de2;
        e.assign(E.data(), E.data() + m);
        de.assign(dE.data(), dE.data() + m);
    }
    return op;
}

// Regular solution r^{n+1/2}(1 + h) of y'' = Q y near the origin for H1, by Picard iteration of
// h' = -r^{-2n-1} int_0^r s^{2n+1} g,  g = 3 (1-U^2)(1+h).
struct InnerRegular {
    int n = 1;
    Chebyshev cheb;
    std::vector<double> h, dh;
    int iterations = 0;

    Pt eval(double r) const {
        if (r == 0) return {0.0, 0.0};
        const double hv = cheb.interp(h, r), dv = cheb.interp(dh, r);
        const double a = std::pow(r, n + 0.5);
        return {a * (1 + hv), (n + 0.5) * a / r * (1 + hv) + a * dv};
    }
};

inline InnerRegular inner_regular_H1(const VortexProfile& p, int n, double r_in, int deg = 40) {
    InnerRegular ir;
    ir.n = n;
    ir.cheb = Chebyshev(deg, 0.0, r_in);
    const auto& c = ir.cheb;
    const int m = deg + 1;
    const auto& gx = boost::math::quadrature::gauss<double, 30>::abscissa();
    const auto& gw = boost::math::quadrature::gauss<double, 30>::weights();
    std::vector<double> tau, tw;
    for (size_t i = 0; i < gx.size(); ++i) {
        for (double sgn : {-1.0, 1.0}) {
            if (gx[i] == 0 && sgn > 0) continue;
            tau.push_back(0.5 * (1 + sgn * gx[i]));
            tw.push_back(0.5 * gw[i]);
        }
    }
    // 1-U^2 at every quadrature point, cached
    std::vector<std::vector<double>> pq(m, std::vector<double>(tau.size()));
    for (int i = 0; i < m; ++i)
        for (size_t q = 0; q < tau.size(); ++q) pq[i][q] = p.one_minus_U2(c.x[i] * tau[q]);
    std::vector<double> h(m, 0.0), dh(m, 0.0);
    for (int it = 0; it < 60; ++it) {
        Eigen::VectorXd d(m);
        for (int i = 0; i < m; ++i) {
            const double r = c.x[i];
            double s = 0;
            for (size_t q = 0; q < tau.size(); ++q) {
                const double hv = r == 0 ? 0.0 : c.interp(h, r * tau[q]);
                s += tw[q] * std::pow(tau[q], 2 * n + 1) * 3.0 * pq[i][q] * (1 + hv);
            }
            d(i) = -r * s;
        }
        const Eigen::VectorXd hn = c.Q * d;
        double diff = 0;
        for (int i = 0; i < m; ++i) {
            diff = std::max(diff, std::abs(hn(i) - h[i]));
            h[i] = hn(i);
            dh[i] = d(i);
        }
        ir.iterations = it + 1;
        if (diff < 1e-12) {
            ir.h = h;
            ir.dh = dh;
            return ir;
        }
    }
    throw NumericalError("Picard iteration fails to contract near the origin");
}

}  // namespace detail

class ZeroEnergyBasis {
public:
    Operator op;
    // c1..c4 (H1 family only)
    std::optional<std::array<double, 4>> constants;
    double eta0 = std::numeric_limits<double>::quiet_NaN();  // H2 family only
    double r_anchor = 0;

    // (value, derivative) of the regular threshold solution
    Pt phi0(double r) const { return impl_->phi(r); }
    // (value, derivative) of the second solution, normalized by W(theta0, phi0) = 1
    Pt theta0(double r) const { return impl_->theta(r); }

    double wronskian(double r) const {
        const Pt t = theta0(r), f = phi0(r);
        return t.v * f.d - t.d * f.v;
    }

    const VortexProfile& profile() const { return *impl_->prof; }
    // lim phi0(r) / r^{n+1/2} as r -> 0
    double phi_lead() const { return op.kind == OpKind::H1 ? 1.0 : impl_->prof->series.at(0); }
    double r_low() const { return impl_->r_lo; }
    double r_high() const { return impl_->r_hi; }

    // Outer solutions sqrt(r)(cos + E1) and sqrt(r)(-sin/w + E2), H1 family, r in [r_anchor, R_inf]
    Pt outer(int k, double r) const { return impl_->outer.eval(k, r); }

    struct Impl {
        Operator op;
        std::shared_ptr<const VortexProfile> prof;
        double r_lo = 1e-4, r_hi = 1e4;
        // H2: J = int_1^r (1-U^2)/(s U^2) ds
        Trajectory<1> j_in, j_out;
        double eta0 = 0;
        // H1
        detail::InnerRegular inner;
        double r_inner = 0.5;
        Trajectory<2> phi_out, theta_in, theta_out;
        detail::OuterPair outer;
        std::array<double, 4> c{};

        Pt phi(double r) const {
            if (op.kind == OpKind::H2) {
                const Pt u = prof->eval(r);
                if (r == 0) return {0.0, 0.0};
                const double s = std::sqrt(r);
                return {s * u.v, 0.5 * u.v / s + s * u.d};
            }
            if (r <= r_inner) return inner.eval(r);
            if (r <= r_hi) {
                const auto y = phi_out(r);
                return {y[0], y[1]};
            }
            return far(0, r);
        }

        Pt theta(double r) const {
            if (op.kind == OpKind::H2) {
                if (r < r_lo) return power_law(theta(r_lo), r_lo, r, 0.5 - op.n);
                double J;
                if (r <= r_hi) J = (r >= 1 ? j_out(r) : j_in(r))[0];
                else J = eta0 - 0.5 * double(op.n) * op.n / (r * r);
                const Pt u = prof->eval(r);
                const double s = std::sqrt(r), I = std::log(r) + J;
                return {-s * u.v * I, -(0.5 * u.v / s + s * u.d) * I - 1.0 / (s * u.v)};
            }
            if (r < r_lo) return power_law(theta(r_lo), r_lo, r, 0.5 - op.n);
            if (r <= r_hi) {
                const auto y = (r >= 1 ? theta_out : theta_in)(r);
                return {y[0], y[1]};
            }
            return far(1, r);
        }

        static Pt power_law(Pt at, double r0, double r, double e) {
            const double f = std::pow(r / r0, e);
            return {at.v * f, at.v * f * e / r};
        }

        // leading large-r form from the connection constants
        Pt far(int which, double r) const {
            const double w = op.omega(), t = std::log(r), s = std::sqrt(r);
            const double ca = which == 0 ? c[0] : c[2], cb = which == 0 ? c[1] : c[3];
            const double Y = ca * std::cos(w * t) + cb * std::sin(w * t);
            const double dY = w * (-ca * std::sin(w * t) + cb * std::cos(w * t));
            return {s * Y, (dY + 0.5 * Y) / s};
        }
    };

    explicit ZeroEnergyBasis(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
        op = impl_->op;
        if (op.kind == OpKind::H1) constants = impl_->c;
        else eta0 = impl_->eta0;
    }

private:
    std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline ZeroEnergyBasis build_H2(const VortexProfile& p, int n, double r_hi) {
    auto impl = std::make_shared<ZeroEnergyBasis::Impl>();
    impl->op = Operator::H2(n);
    impl->prof = std::make_shared<const VortexProfile>(p);
    impl->r_hi = r_hi;
    const VortexProfile& pr = *impl->prof;
    auto rhs = [&pr](double r, const Vec<1>&, Vec<1>& dy) {
        const double u = pr(r);
        dy[0] = pr.one_minus_U2(r) / (r * u * u);
    };
    const Tolerance tol{1e-13, 1e-15};
    impl->j_out = integrate_ode<1>(rhs, 1.0, r_hi, {0.0}, tol);
    impl->j_in = integrate_ode<1>(rhs, 1.0, impl->r_lo, {0.0}, tol);
    // remaining tail in s = 1/t
    const double tail = quad_adaptive(
        [&pr](double t) {
            const double q = pr.one_minus_U2(1.0 / t);
            return q / ((1 - q) * t);
        },
        0.0, 1.0 / r_hi, 1e-15);
    impl->eta0 = impl->j_out.y_end[0] + tail;
    return ZeroEnergyBasis(impl);
}

inline ZeroEnergyBasis build_H1(const VortexProfile& p, int n, double r_anchor, double r_hi) {
    auto impl = std::make_shared<ZeroEnergyBasis::Impl>();
    impl->op = Operator::H1(n);
    impl->prof = std::make_shared<const VortexProfile>(p);
    impl->r_hi = r_hi;
    const VortexProfile& pr = *impl->prof;
    const Operator op = impl->op;
    impl->inner = inner_regular_H1(pr, n, impl->r_inner);

    auto rhs = [&pr, op](double r, const Vec<2>& y, Vec<2>& dy) {
        dy[0] = y[1];
        dy[1] = op.Q(pr, r) * y[0];
    };
    const Tolerance tol{1e-13, 1e-15};
    const Pt s = impl->inner.eval(impl->r_inner);
    impl->phi_out = integrate_ode<2>(rhs, impl->r_inner, r_hi, {s.v, s.d}, tol);

    const double r_inf = 200.0;
    impl->outer = outer_volterra(pr, n, r_anchor, r_inf);
    const double w = op.omega();
    // c1, c2 from value and derivative at the anchor
    {
        const auto y = impl->phi_out(r_anchor);
        const Pt f1 = impl->outer.eval(0, r_anchor), f2 = impl->outer.eval(1, r_anchor);
        Eigen::Matrix2d M;
        M << f1.v, -w * f2.v, f1.d, -w * f2.d;
        if (std::abs(M.determinant()) < 1e-12) throw NumericalError("matching system singular at the anchor");
        const Eigen::Vector2d sol = M.partialPivLu().solve(Eigen::Vector2d(y[0], y[1]));
        impl->c[0] = sol(0);
        impl->c[1] = sol(1);
    }
    // second solution through W(theta, phi) = 1 at r = 1
    {
        const auto y1 = impl->phi_out(1.0);
        const Vec<2> t1{0.0, -1.0 / y1[0]};
        impl->theta_out = integrate_ode<2>(rhs, 1.0, r_hi, t1, tol);
        impl->theta_in = integrate_ode<2>(rhs, 1.0, impl->r_lo, t1, tol);
    }
    // c3, c4 by least squares against the outer pair on [50, 150]
    {
        const int N = 201;
        Eigen::MatrixXd A(N, 2);
        Eigen::VectorXd b(N);
        for (int i = 0; i < N; ++i) {
            const double r = 50.0 + 100.0 * i / (N - 1);
            const double sr = std::sqrt(r);
            A(i, 0) = impl->outer.eval(0, r).v / sr;
            A(i, 1) = -w * impl->outer.eval(1, r).v / sr;
            b(i) = impl->theta_out(r)[0] / sr;
        }
        const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
        impl->c[2] = sol(0);
        impl->c[3] = sol(1);
    }
    return ZeroEnergyBasis(impl);
}

}  // namespace detail

// Threshold pair for H2: phi0 = sqrt(r) U, theta0 by reduction of order with theta0(1) = 0.
inline ZeroEnergyBasis zero_basis_H2(const VortexProfile& p, double r_hi = 1e4) {
    return detail::build_H2(p, p.degree, r_hi);
}

// Threshold pair for H1 (energy 2) with connection constants c1..c4.
inline ZeroEnergyBasis zero_basis_H1(const VortexProfile& p, double r_anchor = 20.0, double r_hi = 1e4) {
    if (!(r_anchor >= 10 && r_anchor <= 50)) throw ConfigError("r_anchor must lie in [10, 50]");
    return detail::build_H1(p, p.degree, r_anchor, r_hi);
}

inline ZeroEnergyBasis zero_basis_n(const VortexProfile& p, OpKind kind, int n, double r_anchor = 20.0) {
    if (n < 2) throw ConfigError("zero_basis_n requires n >= 2");
    if (p.degree != n) throw ConfigError("profile degree does not match the requested n");
    return kind == OpKind::H1 ? zero_basis_H1(p, r_anchor) : zero_basis_H2(p);
}

inline ZeroEnergyBasis zero_basis(const VortexProfile& p, const Operator& op) {
    if (p.degree != op.n) throw ConfigError("profile degree does not match the operator degree");
    return op.kind == OpKind::H1 ? zero_basis_H1(p) : zero_basis_H2(p);
}

}  // namespace glv
