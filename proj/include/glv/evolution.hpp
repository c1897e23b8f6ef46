#pragma once

#include <glv/transform.hpp>

#include <optional>

namespace glv {

enum class Flow { heat, klein_gordon, wave };

inline std::string flow_name(Flow f) {
    switch (f) {
        case Flow::heat: return "heat";
        case Flow::klein_gordon: return "kg";
        case Flow::wave: return "wave";
    }
    return "?";
}

inline Flow parse_flow(const std::string& s) {
    if (s == "heat") return Flow::heat;
    if (s == "kg" || s == "klein_gordon" || s == "klein-gordon") return Flow::klein_gordon;
    if (s == "wave") return Flow::wave;
    throw ConfigError("unknown flow '" + s + "' (expected heat, kg or wave)");
}

struct EvolutionSpec {
    Flow flow = Flow::heat;
    FieldSample f;
    std::optional<FieldSample> g;  // initial velocity for kg / wave
    std::vector<double> times;
};

struct EvolutionResult {
    Flow flow = Flow::heat;
    std::vector<double> times;
    std::vector<FieldSample> solutions;
    std::vector<double> energy;        // wave / kg: conserved quadratic form in k-space
    std::vector<double> spectral_sup;  // sup_k of the evolved transform (kg / wave: of the + branch)
    double truncation = 0;             // k-grid truncation estimate of the data
};

// Transform options sized for a flow up to t_max: radius covers the outgoing packet,
// and the k panels meet the budget 40 t k_max / (2 pi) nodes.
inline TransformOptions evolution_options(double t_max, double support, double k_max = 8) {
    TransformOptions o;
    o.k_max = k_max;
    o.r_max = support + t_max + 20;
    const double budget_h = 8 * 2 * std::numbers::pi / (40 * std::max(t_max, 1.0));
    o.k_panel = std::min(o.phase / o.r_max, budget_h);
    return o;
}

inline void check_pairing(Flow flow, const Operator& op) {
    if (flow == Flow::klein_gordon && op.kind != OpKind::H1)
        throw ConfigError("the Klein-Gordon flow pairs with H1");
    if (flow == Flow::wave && op.kind != OpKind::H2) throw ConfigError("the wave flow pairs with H2");
}

inline void check_resolution(const TransformPlan& plan, double t) {
    const double need = 40 * t * plan.options().k_max / (2 * std::numbers::pi);
    if (double(plan.k_grid().size()) < need)
        throw NumericalError("resolution budget exceeded at t=" + std::to_string(t) + ": need " +
                             std::to_string(size_t(std::ceil(need))) + " k nodes, have " +
                             std::to_string(plan.k_grid().size()));
}

// v(t, r) = r^{-1/2} int Phi(r, k) V(t, k) 2k rho' dk
inline FieldSample synthesize(const TransformPlan& plan, const std::vector<cplx>& V) {
    const Eigen::Index nk = Eigen::Index(plan.k_grid().size());
    Eigen::VectorXd re(nk);
    const auto& sw = plan.synthesis_weights();
    for (Eigen::Index j = 0; j < nk; ++j) re(j) = sw(j) * V[size_t(j)].real();
    const Eigen::VectorXd v = plan.phi_matrix() * re;
    FieldSample s;
    s.r = plan.r_grid().nodes;
    s.w = plan.r_grid().weights;
    s.values.resize(s.r.size());
    for (size_t i = 0; i < s.r.size(); ++i) s.values[i] = v(Eigen::Index(i)) / std::sqrt(s.r[i]);
    s.compact = false;
    s.tail_exponent = 3;
    s.support = plan.options().r_max;
    return s;
}

inline EvolutionResult evolve(const TransformPlan& plan, const EvolutionSpec& spec, unsigned threads = 1) {
    check_pairing(spec.flow, plan.op());
    if (spec.times.empty()) throw ConfigError("no output times");
    for (double t : spec.times) {
        if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("times must be finite and >= 0");
        check_resolution(plan, t);
    }
    if (spec.flow == Flow::heat && spec.g) throw ConfigError("the heat flow takes no initial velocity");
    const SpectrumSample F = plan.forward(spec.f);
    std::vector<cplx> G(F.size(), 0.0);
    if (spec.g) {
        const SpectrumSample Gs = plan.forward(*spec.g);
        G = Gs.values;
    }
    const size_t nk = F.size();
    const double sigma = plan.op().sigma();
    std::vector<double> omega(nk), lambda(nk);
    for (size_t j = 0; j < nk; ++j) {
        const double k = F.k[j];
        lambda[j] = k * k + sigma;
        omega[j] = std::sqrt(lambda[j]);
    }
    // F_pm = (F +- G / (i omega)) / 2
    std::vector<cplx> Fp(nk), Fm(nk);
    for (size_t j = 0; j < nk; ++j) {
        const cplx q = G[j] / cplx(0.0, omega[j]);
        Fp[j] = 0.5 * (F.values[j] + q);
        Fm[j] = 0.5 * (F.values[j] - q);
    }

    EvolutionResult out;
    out.flow = spec.flow;
    out.times = spec.times;
    out.truncation = plan.truncation_estimate(F);
    const size_t nt = spec.times.size();
    out.solutions.resize(nt);
    out.energy.assign(nt, 0.0);
    out.spectral_sup.assign(nt, 0.0);
    const auto& sw = plan.synthesis_weights();
    parallel_for(nt, threads, [&](size_t it) {
        const double t = spec.times[it];
        std::vector<cplx> V(nk);
        double e = 0, sup = 0;
        for (size_t j = 0; j < nk; ++j) {
            if (spec.flow == Flow::heat) {
                V[j] = std::exp(-t * lambda[j]) * F.values[j];
                sup = std::max(sup, std::abs(V[j]));
            } else {
                const cplx ph = std::exp(cplx(0.0, t * omega[j]));
                const cplx p = ph * Fp[j], m = std::conj(ph) * Fm[j];
                V[j] = p + m;
                const cplx dV = cplx(0.0, omega[j]) * (p - m);
                e += sw(Eigen::Index(j)) * (lambda[j] * std::norm(V[j]) + std::norm(dV));
                sup = std::max(sup, std::abs(p));
            }
        }
        out.energy[it] = e;
        out.spectral_sup[it] = sup;
        out.solutions[it] = synthesize(plan, V);
    });
    return out;
}

struct DecayEntry {
    double t = 0;
    double sup = 0;       // sup_r |v|
    double weighted = 0;  // wave: sup_r sqrt(t) sqrt(|t - r| + 1) |v|
    double t_sup = 0;     // t sup_r |v|
};

struct DecayReport {
    Flow flow = Flow::heat;
    std::vector<DecayEntry> entries;
    double exponent = 0;  // least-squares slope of log sup vs log t over the final decade
    double exponent_window_start = 0;
};

inline DecayReport decay_report(const std::vector<double>& times, const std::vector<FieldSample>& sols, Flow flow) {
    if (times.size() != sols.size()) throw ConfigError("times and solutions differ in length");
    if (times.size() < 6) throw ConfigError("decay report needs at least 6 times");
    const double t0 = *std::min_element(times.begin(), times.end());
    const double t1 = *std::max_element(times.begin(), times.end());
    if (!(t0 > 0) || std::log10(t1 / t0) < 1.5 - 1e-12) throw ConfigError("decay report needs times spanning 1.5 decades");
    DecayReport rep;
    rep.flow = flow;
    for (size_t i = 0; i < times.size(); ++i) {
        DecayEntry e;
        e.t = times[i];
        const auto& s = sols[i];
        for (size_t j = 0; j < s.size(); ++j) {
            const double v = std::abs(s.values[j]);
            e.sup = std::max(e.sup, v);
            e.weighted = std::max(e.weighted, std::sqrt(e.t) * std::sqrt(std::abs(e.t - s.r[j]) + 1) * v);
        }
        e.t_sup = e.t * e.sup;
        if (!std::isfinite(e.sup) || !std::isfinite(e.weighted)) throw NumericalError("decay report: non-finite norm");
        rep.entries.push_back(e);
    }
    rep.exponent_window_start = t1 / 10;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& e : rep.entries)
        if (e.t >= rep.exponent_window_start * (1 - 1e-12)) {
            const double x = std::log(e.t), y = std::log(e.sup);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
            ++n;
        }
    if (n < 2) throw ConfigError("decay report needs at least two times in the final decade");
    rep.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

inline DecayReport decay_report(const EvolutionResult& r) { return decay_report(r.times, r.solutions, r.flow); }

struct WeightedEntry {
    double t = 0, lhs = 0, rhs = 0, ratio = 0;
};

struct WeightedReport {
    Flow flow = Flow::klein_gordon;
    FourierNorms f_norms, g_norms;
    bool has_g = false;
    std::vector<WeightedEntry> entries;
    double max_ratio = 0, min_ratio = 0;
};

// Evaluates both sides of the weighted pointwise estimates for kg (H1) or wave (H2).
inline WeightedReport verify_weighted_estimates(const TransformPlan& plan, Flow flow, const FieldSample& f,
                                                const std::optional<FieldSample>& g, const std::vector<double>& times,
                                                double eps = 0.1) {
    if (flow == Flow::heat) throw ConfigError("weighted estimates are stated for kg and wave");
    check_pairing(flow, plan.op());
    for (double t : times)
        if (!(t > 0)) throw ConfigError("weighted estimates need t > 0");
    WeightedReport rep;
    rep.flow = flow;
    rep.has_g = g.has_value() && g->sup() > 0;
    if (flow == Flow::klein_gordon) {
        rep.f_norms = fourier_norms(plan, f, 2.0, 11.0 / 4, 17.0 / 4);
        if (rep.has_g) rep.g_norms = fourier_norms(plan, *g, 1.0, 7.0 / 4, 13.0 / 4);
    } else {
        rep.f_norms = fourier_norms(plan, f, 0.5 + eps, 0.5, 0.0, 1.0);
        if (rep.has_g) rep.g_norms = fourier_norms(plan, *g, 0.5 + eps, 0.5, 0.0);
    }
    EvolutionSpec spec;
    spec.flow = flow;
    spec.f = f;
    if (rep.has_g) spec.g = g;
    spec.times = times;
    const EvolutionResult ev = evolve(plan, spec);
    rep.min_ratio = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        WeightedEntry e;
        e.t = t;
        e.lhs = ev.solutions[i].sup();
        const auto& F = rep.f_norms;
        const auto& G = rep.g_norms;
        if (flow == Flow::klein_gordon) {
            e.rhs = F.sup / t + F.d1 / std::pow(t, 1.25) + F.d2 / std::pow(t, 1.75);
            if (rep.has_g) e.rhs += G.sup / t + G.d1 / std::pow(t, 1.25) + G.d2 / std::pow(t, 1.75);
        } else {
            e.rhs = F.sup / std::sqrt(t) + F.d1 / t;
            if (rep.has_g) e.rhs += G.sup / std::sqrt(t) + G.d1 / t;
        }
        e.ratio = e.lhs / e.rhs;
        rep.max_ratio = std::max(rep.max_ratio, e.ratio);
        rep.min_ratio = std::min(rep.min_ratio, e.ratio);
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace glv
