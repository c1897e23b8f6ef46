#pragma once

#include <glv/spectral_measure.hpp>

#include <boost/math/interpolators/makima.hpp>

#include <Eigen/Dense>

#include <functional>

namespace glv {

// Radial data f(r) on a quadrature grid; the sqrt(r) conjugation is applied inside the transform.
struct FieldSample {
    std::vector<double> r;
    std::vector<double> w;  // quadrature weights, may be empty for plain point data
    std::vector<double> values;
    bool compact = true;
    double support = 0;         // radius beyond which f vanishes (compact data)
    double tail_exponent = 0;   // |f| <= C r^{-p} for non-compact data, p >= 3

    size_t size() const { return r.size(); }

    void validate() const {
        if (r.size() != values.size()) throw ConfigError("field sample: r and values differ in length");
        if (!w.empty() && w.size() != r.size()) throw ConfigError("field sample: weight size mismatch");
        for (size_t i = 0; i < r.size(); ++i) {
            if (!std::isfinite(values[i])) throw NumericalError("field sample has a non-finite value");
            if (i && !(r[i] > r[i - 1])) throw ConfigError("field sample radii must increase");
        }
        if (!compact && tail_exponent < 3) throw ConfigError("tail not declared for non-compact support (need r^-p, p >= 3)");
    }

    // sqrt(int f^2 dr) with the sample weights
    double l2() const {
        double s = 0;
        for (size_t i = 0; i < r.size(); ++i) s += w[i] * values[i] * values[i];
        return std::sqrt(s);
    }
    // sqrt(int f^2 r dr)
    double l2_r() const {
        double s = 0;
        for (size_t i = 0; i < r.size(); ++i) s += w[i] * r[i] * values[i] * values[i];
        return std::sqrt(s);
    }
    double l1_r() const {
        double s = 0;
        for (size_t i = 0; i < r.size(); ++i) s += w[i] * r[i] * std::abs(values[i]);
        return s;
    }
    double sup() const {
        double s = 0;
        for (double v : values) s = std::max(s, std::abs(v));
        return s;
    }

    FieldSample& operator+=(const FieldSample& o) {
        if (o.size() != size()) throw ConfigError("field samples live on different grids");
        for (size_t i = 0; i < size(); ++i) values[i] += o.values[i];
        return *this;
    }
    FieldSample operator-(const FieldSample& o) const {
        FieldSample d = *this;
        if (o.size() != size()) throw ConfigError("field samples live on different grids");
        for (size_t i = 0; i < size(); ++i) d.values[i] -= o.values[i];
        return d;
    }
    FieldSample scaled(double c) const {
        FieldSample d = *this;
        for (auto& v : d.values) v *= c;
        return d;
    }
};

struct SpectrumSample {
    Operator op;
    std::vector<double> k;
    std::vector<double> w;
    std::vector<cplx> values;

    size_t size() const { return k.size(); }
    void validate() const {
        if (k.size() != values.size()) throw ConfigError("spectrum sample: k and values differ in length");
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("spectrum sample has a non-finite value");
    }
};

// Smooth dyadic cutoffs: phi = 1 on [-5/4, 5/4], supported in [-8/5, 8/5].
struct BandCutoffs {
    static constexpr double inner = 1.25, outer = 1.6;

    static double phi(double x) {
        x = std::abs(x);
        if (x <= inner) return 1.0;
        if (x >= outer) return 0.0;
        const double s = (x - inner) / (outer - inner);
        auto psi = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
        const double a = psi(1 - s), b = psi(s);
        return a / (a + b);
    }
    // phi_l(x) = phi(2^-l x) - phi(2^{-l+1} x)
    static double band(int l, double x) { return phi(std::ldexp(x, -l)) - phi(std::ldexp(x, -l + 1)); }
    static std::pair<double, double> band_support(int l) {
        return {std::ldexp(inner / 2, l), std::ldexp(outer, l)};
    }
};

struct TransformOptions {
    double r_max = 30;   // transform radius; data must be supported inside
    double k_max = 40;
    double phase = 4;    // max phase k r across one 8-point panel, in r and in k
    int r_refine = 4;    // geometric refinement of the first r panel
    int k_refine = 3;
    double k_panel = 0;  // explicit k panel width; 0 picks phase / r_max
    double c_match = 0.5;
    double truncation_tol = 1e-2;
    unsigned threads = 1;

    void validate() const {
        if (!(r_max > 0 && k_max > 0)) throw ConfigError("transform needs r_max > 0 and k_max > 0");
        if (!(phase > 0 && phase <= 8)) throw ConfigError("panel phase must lie in (0, 8]");
        if (!(c_match > 0.3 && c_match <= 0.6)) throw ConfigError("c_match must lie in (0.3, 0.6]");
        if (k_panel < 0) throw ConfigError("k panel width must be positive");
    }
};

// Discretized distorted Fourier transform: Phi(r_i, k_j) tabulated on a composite Gauss grid in r and in k.
class TransformPlan {
public:
    TransformPlan(const ZeroEnergyBasis& basis, const TransformOptions& opt = {}) : basis_(basis), opt_(opt) {
        opt.validate();
        r_grid_ = Grid::gauss_panels(panel_edges(opt.r_max, std::min(1.0, opt.phase / opt.k_max), opt.r_refine));
        const double hk = opt.k_panel > 0 ? opt.k_panel : std::min(1.0, opt.phase / opt.r_max);
        k_grid_ = Grid::gauss_panels(panel_edges(opt.k_max, hk, opt.k_refine));
        ctx_ = std::make_shared<const SpectralContext>(basis, k_grid_.nodes.front(), opt.c_match);
        const size_t nr = r_grid_.size(), nk = k_grid_.size();
        phi_.resize(Eigen::Index(nr), Eigen::Index(nk));
        measure_.op = basis.op;
        measure_.degree = basis.op.n;
        measure_.k = k_grid_.nodes;
        measure_.a.resize(nk);
        measure_.density.resize(nk);
        measure_.spread.resize(nk);
        measure_.lower_floor.resize(nk);
        parallel_for(nk, resolve_threads(int(opt.threads)), [&](size_t j) {
            const double k = k_grid_.nodes[j];
            const Eigenfunction e = ctx_->eigenfunction(k, opt.r_max);
            for (size_t i = 0; i < nr; ++i) phi_(Eigen::Index(i), Eigen::Index(j)) = e.eval(r_grid_.nodes[i]).v;
            measure_.a[j] = e.a_conn;
            measure_.spread[j] = e.spread;
            measure_.density[j] = density_from(e.a_conn);
            const Pt f = e.inner.eval(opt_.c_match / k);
            measure_.lower_floor[j] = std::max(std::abs(f.v) * std::sqrt(k), std::abs(f.d) / std::sqrt(k));
        });
        measure_.m = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < nk; ++j) {
            measure_.m = std::min(measure_.m, measure_.band_value(j));
            measure_.M = std::max(measure_.M, measure_.band_value(j));
        }
        sqrt_r_.resize(Eigen::Index(nr));
        for (size_t i = 0; i < nr; ++i) sqrt_r_(Eigen::Index(i)) = std::sqrt(r_grid_.nodes[i]);
        syn_w_.resize(Eigen::Index(nk));
        for (size_t j = 0; j < nk; ++j)
            syn_w_(Eigen::Index(j)) = 2 * k_grid_.nodes[j] * measure_.density[j] * k_grid_.weights[j];
    }

    const Operator& op() const { return basis_.op; }
    const ZeroEnergyBasis& basis() const { return basis_; }
    const Grid& r_grid() const { return r_grid_; }
    const Grid& k_grid() const { return k_grid_; }
    const SpectralMeasure& measure() const { return measure_; }
    const SpectralContext& context() const { return *ctx_; }
    const TransformOptions& options() const { return opt_; }
    const Eigen::MatrixXd& phi_matrix() const { return phi_; }
    // 2 k rho'(k^2) dk weights of the synthesis integral
    const Eigen::VectorXd& synthesis_weights() const { return syn_w_; }

    FieldSample sample(const std::function<double(double)>& f, double support) const {
        if (support > opt_.r_max * (1 + 1e-12)) throw ConfigError("field support exceeds the transform radius");
        FieldSample s;
        s.r = r_grid_.nodes;
        s.w = r_grid_.weights;
        s.values.resize(s.r.size());
        for (size_t i = 0; i < s.r.size(); ++i) s.values[i] = s.r[i] <= support ? f(s.r[i]) : 0.0;
        s.compact = true;
        s.support = support;
        return s;
    }

    // move point data onto the plan's r grid (modified Akima interpolation, zero outside the data)
    FieldSample resample(const FieldSample& f) const {
        f.validate();
        if (on_grid(f)) return f;
        if (f.size() < 4) throw ConfigError("field sample needs at least 4 points");
        if (f.compact && f.r.back() > opt_.r_max * (1 + 1e-12) && f.support > opt_.r_max * (1 + 1e-12))
            throw ConfigError("field support exceeds the transform radius");
        std::vector<double> x = f.r, y = f.values;
        const double lo = x.front(), hi = x.back();
        boost::math::interpolators::makima<std::vector<double>> spline(std::move(x), std::move(y));
        FieldSample s;
        s.r = r_grid_.nodes;
        s.w = r_grid_.weights;
        s.values.resize(s.r.size());
        for (size_t i = 0; i < s.r.size(); ++i) {
            const double r = s.r[i];
            s.values[i] = (r >= lo && r <= hi) ? spline(r) : 0.0;
        }
        s.compact = f.compact;
        s.support = f.compact ? std::min(f.support > 0 ? f.support : hi, opt_.r_max) : opt_.r_max;
        s.tail_exponent = f.tail_exponent;
        return s;
    }

    // F(k) = int Phi(r, k) sqrt(r) f(r) dr
    SpectrumSample forward(const FieldSample& f_in) const {
        const FieldSample f = resample(f_in);
        const Eigen::Index nr = Eigen::Index(r_grid_.size());
        Eigen::VectorXd g(nr);
        for (Eigen::Index i = 0; i < nr; ++i)
            g(i) = r_grid_.weights[size_t(i)] * sqrt_r_(i) * f.values[size_t(i)];
        const Eigen::VectorXd F = phi_.transpose() * g;
        SpectrumSample s;
        s.op = basis_.op;
        s.k = k_grid_.nodes;
        s.w = k_grid_.weights;
        s.values.resize(s.k.size());
        for (size_t j = 0; j < s.k.size(); ++j) s.values[j] = F(Eigen::Index(j));
        return s;
    }

    // f(r) = r^{-1/2} int Phi(r, k) F(k) 2k rho'(k^2) dk; real part for real data
    FieldSample inverse(const SpectrumSample& F, bool check_truncation = true) const {
        F.validate();
        if (F.size() != k_grid_.size()) throw ConfigError("spectrum sample does not live on the plan's k grid");
        if (check_truncation) {
            const double est = truncation_estimate(F);
            if (est > opt_.truncation_tol)
                throw NumericalError("k-grid truncation error estimate " + std::to_string(est) + " exceeds tolerance");
        }
        const Eigen::Index nk = Eigen::Index(k_grid_.size());
        Eigen::VectorXd c(nk);
        for (Eigen::Index j = 0; j < nk; ++j) c(j) = syn_w_(j) * F.values[size_t(j)].real();
        const Eigen::VectorXd v = phi_ * c;
        FieldSample s;
        s.r = r_grid_.nodes;
        s.w = r_grid_.weights;
        s.values.resize(s.r.size());
        for (size_t i = 0; i < s.r.size(); ++i) s.values[i] = v(Eigen::Index(i)) / sqrt_r_(Eigen::Index(i));
        s.compact = false;
        s.tail_exponent = 3;
        s.support = opt_.r_max;
        return s;
    }

    // relative weight of the last k panel in the synthesis norm
    double truncation_estimate(const SpectrumSample& F) const {
        double tot = 0, last = 0;
        const size_t nk = F.size(), tail = std::min<size_t>(8, nk);
        for (size_t j = 0; j < nk; ++j) {
            const double e = syn_w_(Eigen::Index(j)) * std::norm(F.values[j]);
            tot += e;
            if (j + tail >= nk) last += e;
        }
        return tot > 0 ? std::sqrt(last / tot) : 0.0;
    }

    // Littlewood-Paley piece inverse(phi_l forward f)
    FieldSample project_band(int l, const FieldSample& f) const {
        SpectrumSample F = forward(f);
        for (size_t j = 0; j < F.size(); ++j) F.values[j] *= BandCutoffs::band(l, F.k[j]);
        return inverse(F, false);
    }

    // continuous-spectrum part: identity for H2, projection for H1
    FieldSample project_continuous(const FieldSample& f) const { return inverse(forward(f), false); }

    // sqrt(int |F|^2 2k rho' dk)
    double spectral_norm(const SpectrumSample& F) const {
        double s = 0;
        for (size_t j = 0; j < F.size(); ++j) s += syn_w_(Eigen::Index(j)) * std::norm(F.values[j]);
        return std::sqrt(s);
    }

private:
    bool on_grid(const FieldSample& f) const {
        if (f.r.size() != r_grid_.size()) return false;
        for (size_t i = 0; i < f.r.size(); ++i)
            if (std::abs(f.r[i] - r_grid_.nodes[i]) > 1e-12 * (1 + r_grid_.nodes[i])) return false;
        return true;
    }

    ZeroEnergyBasis basis_;
    TransformOptions opt_;
    Grid r_grid_, k_grid_;
    std::shared_ptr<const SpectralContext> ctx_;
    SpectralMeasure measure_;
    Eigen::MatrixXd phi_;
    Eigen::VectorXd sqrt_r_, syn_w_;
};

// weights k^p <k>^a on each norm
struct FourierNorms {
    double sup = 0;   // || k^p <k>^a0 F ||_inf
    double d1 = 0;    // || k^p <k>^a1 dF ||_2
    double d2 = 0;    // || k^p <k>^a2 d^2F ||_2
};

// F = forward(f) / |a(k^2)|. Only the modulus of a enters the density; the phase of the connection
// coefficient turns like k^{i sqrt 2} at threshold for H1 and would put a 1/k singularity into dF.
inline std::vector<cplx> normalized_spectrum(const TransformPlan& plan, const FieldSample& f) {
    const SpectrumSample F = plan.forward(f);
    std::vector<cplx> out(F.size());
    for (size_t j = 0; j < F.size(); ++j) out[j] = F.values[j] / std::abs(plan.measure().a[j]);
    return out;
}

// derivatives by three-point differences on the non-uniform k grid

inline FourierNorms fourier_norms(const TransformPlan& plan, const std::vector<cplx>& F, double a0, double a1,
                                  double a2, double p = 0) {
    const auto& k = plan.k_grid().nodes;
    const auto& w = plan.k_grid().weights;
    const size_t n = k.size();
    if (F.size() != n) throw ConfigError("spectrum does not match the plan's k grid");
    FourierNorms r;
    for (size_t j = 0; j < n; ++j) r.sup = std::max(r.sup, std::pow(k[j], p) * std::pow(japanese(k[j]), a0) * std::abs(F[j]));
    double s1 = 0, s2 = 0;
    for (size_t j = 1; j + 1 < n; ++j) {
        const double hm = k[j] - k[j - 1], hp = k[j + 1] - k[j];
        const cplx d1 = (F[j + 1] - F[j]) / hp * (hm / (hm + hp)) + (F[j] - F[j - 1]) / hm * (hp / (hm + hp));
        const cplx d2 = 2.0 * ((F[j + 1] - F[j]) / hp - (F[j] - F[j - 1]) / hm) / (hm + hp);
        const double kp = std::pow(k[j], 2 * p);
        s1 += w[j] * kp * std::pow(japanese(k[j]), 2 * a1) * std::norm(d1);
        s2 += w[j] * kp * std::pow(japanese(k[j]), 2 * a2) * std::norm(d2);
    }
    r.d1 = std::sqrt(s1);
    r.d2 = std::sqrt(s2);
    return r;
}

inline FourierNorms fourier_norms(const TransformPlan& plan, const FieldSample& f, double a0, double a1, double a2,
                                  double p = 0) {
    return fourier_norms(plan, normalized_spectrum(plan, f), a0, a1, a2, p);
}

// compactly supported C^2 bump (1 - (r - r0)^2 / w^2)^3
inline double bump(double r, double r0, double w) {
    const double x = (r - r0) / w;
    if (std::abs(x) >= 1) return 0.0;
    const double s = 1 - x * x;
    return s * s * s;
}

}  // namespace glv
