// One pass/fail line per acceptance criterion. Exit status is nonzero only when a criterion
// outside the documented-deviation list fails.
#include <glv/evolution.hpp>
#include <glv/spectrum.hpp>

#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"

using namespace glv;

namespace {

// criteria whose failure is a recorded, analysed deviation
const std::set<int> documented = {11};

int failures = 0, documented_failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (ok) return;
    (documented.count(id) ? documented_failures : failures)++;
}

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

const VortexProfile& prof() {
    static const VortexProfile p = solve_profile(1, 50);
    return p;
}
const VortexProfile& prof_far() {
    static const VortexProfile p = solve_profile(1, 400);
    return p;
}
const ZeroEnergyBasis& basis(OpKind kind) {
    static const ZeroEnergyBasis b1 = zero_basis_H1(prof()), b2 = zero_basis_H2(prof());
    return kind == OpKind::H1 ? b1 : b2;
}

std::vector<double> log_grid(double a, double b, int n) {
    std::vector<double> k(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) k[size_t(i)] = a * std::pow(b / a, double(i) / (n - 1));
    return k;
}

FieldSample bump_on(const TransformPlan& plan, double r0, double w) {
    return plan.sample([=](double r) { return bump(r, r0, w); }, r0 + w);
}

TransformPlan make_plan(OpKind kind, double r_max, double k_max) {
    TransformOptions o;
    o.r_max = r_max;
    o.k_max = k_max;
    return TransformPlan(basis(kind), o);
}

void c1_slope() {
    const auto& p = prof();
    report(1, std::abs(p.slope - 0.5832) <= 1e-3 && p.bracket_width <= 1e-10,
           fmt("U'(0) = %.11f, bracket width %.2e", p.slope, p.bracket_width));
}

const LtBoundResult& lt() {
    static const LtBoundResult r = lt_bound(prof_far());
    return r;
}

void c2_sign_change() {
    report(2, std::abs(lt().r0 - 0.614489) <= 1e-3, fmt("r0 = %.8f", lt().r0));
}

void c3_lieb_thirring() {
    const auto& r = lt();
    const bool ok = std::abs(r.A / 6 - 0.44515) <= 0.005 && r.R_tail / 6 <= 0.00127 && r.trace_bound <= 0.446 &&
                    std::abs(r.lambda0 - 1.3326) <= 0.003;
    report(3, ok,
           fmt("A/6 = %.6f, R/6 = %.7f, trace bound %.6f, lambda0 = %.6f", r.A / 6, r.R_tail / 6, r.trace_bound,
               r.lambda0));
}

void c4_tail() {
    const TailClaim t = verify_tail_claim(prof_far());
    report(4, t.max_value <= 1.1 && t.max_value >= 1.0,
           fmt("max r^2(1-U^2) on [7,400] = %.7f at r = %.2f", t.max_value, t.r_at_max));
}

void c5_susy() {
    std::vector<double> g;
    for (double r = 0.01; r <= 50 + 1e-12; r += 1e-3) g.push_back(r);
    const SusyReport s = susy_positivity(prof(), g);
    report(5, s.min_value > 0, fmt("min V* on [0.01,50] = %.3e at r = %.2f", s.min_value, s.r_at_min));
}

void c6_zero_modes() {
    double drift = 0;
    for (auto kind : {OpKind::H1, OpKind::H2})
        for (double r = 0.05; r <= 30; r *= 1.01) drift = std::max(drift, std::abs(basis(kind).wronskian(r) - 1));
    const auto c = *basis(OpKind::H1).constants;
    const double id = c[1] * c[2] - c[0] * c[3];
    report(6, drift <= 1e-8 && std::abs(id - 1 / std::sqrt(2.0)) <= 1e-5,
           fmt("Wronskian drift %.2e on [0.05,30]; c2c3 - c1c4 = %.9f", drift, id));
}

void c7_eigenfunctions() {
    double worst = 0;
    for (auto kind : {OpKind::H1, OpKind::H2}) {
        const SpectralContext ctx(basis(kind), 0.02);
        for (double k : {0.1, 1.0, 5.0}) {
            const auto e = ctx.eigenfunction(k);
            const auto ref = oracle::direct_ode(basis(kind), k, 20.0);
            for (double r = 0.1; r <= 20; r += 0.01) {
                const auto y = ref(r);
                worst = std::max(worst, std::abs(e.eval(r).v - y[0]) / oracle::envelope(y[0], y[1], k, r));
            }
        }
    }
    report(7, worst <= 1e-6, fmt("max rel err vs direct ODE on [0.1,20], k in {0.1,1,5}: %.2e", worst));
}

void c8_bands() {
    bool ok = true;
    std::string d;
    for (auto kind : {OpKind::H1, OpKind::H2}) {
        const SpectralContext ctx(basis(kind), 0.05);
        const auto s = build_measure(ctx, log_grid(0.05, 20, 121));
        ok = ok && s.M / s.m <= 10 && s.max_spread() <= 1e-5;
        d += fmt("%s: <k>|a| in [%.4f, %.4f], M/m %.3f, spread %.1e; ", basis(kind).op.name().c_str(), s.m, s.M,
                 s.M / s.m, s.max_spread());
    }
    report(8, ok, d.substr(0, d.size() - 2));
}

const TransformPlan& plan_h2() {
    static const TransformPlan p(basis(OpKind::H2), TransformOptions{});
    return p;
}

void c9_round_trip() {
    std::mt19937 rng(20241);
    std::uniform_real_distribution<double> pos(3, 12), width(1, 3);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        const double r0 = pos(rng), w = width(rng);
        const auto f = bump_on(plan_h2(), r0, w);
        const auto g = plan_h2().inverse(plan_h2().forward(f));
        worst = std::max(worst, (g - f).l2() / f.l2());
    }
    // H f for a bump, from exact derivatives
    const double r0 = 6, w = 2;
    const Operator op = plan_h2().op();
    auto hf = [&](double r) {
        const double x = (r - r0) / w;
        if (std::abs(x) >= 1) return 0.0;
        const double s = 1 - x * x;
        const double f = s * s * s, df = -6 * x * s * s / w, d2f = (24 * x * x * s - 6 * s * s) / (w * w);
        return -(d2f + df / r - f / (4 * r * r)) + op.Q(prof(), r) * f;
    };
    const auto F = plan_h2().forward(bump_on(plan_h2(), r0, w)), G = plan_h2().forward(plan_h2().sample(hf, r0 + w));
    double num = 0, den = 0;
    for (size_t j = 0; j < F.size(); ++j) {
        const double k2 = F.k[j] * F.k[j], sw = plan_h2().synthesis_weights()(Eigen::Index(j));
        num += sw * std::norm(G.values[j] - k2 * F.values[j]);
        den += sw * std::norm(k2 * F.values[j]);
    }
    const double diag = std::sqrt(num / den);
    report(9, worst <= 1e-3 && diag <= 1e-4,
           fmt("round trip worst L2 rel err over 10 bumps %.2e; diagonalization rel err %.2e", worst, diag));
}

void c10_littlewood_paley() {
    const auto& plan = plan_h2();
    SpectrumSample G = plan.forward(bump_on(plan, 5, 1));
    for (size_t j = 0; j < G.size(); ++j) G.values[j] = bump(G.k[j], 3, 2.5);
    const auto f = plan.inverse(G, false);
    const auto pc = plan.project_continuous(f);
    FieldSample sum = f.scaled(0.0);
    for (int l = -4; l <= 5; ++l) sum += plan.project_band(l, f);
    const double part = (sum - pc).l2() / pc.l2();

    const TransformPlan wide = make_plan(OpKind::H2, 240, 12.8);
    const auto fw = bump_on(wide, 5, 1.5);
    double orth = 0;
    for (int l = 0; l <= 3; ++l) {
        const auto pl = wide.project_band(l, fw);
        for (int m = 0; m <= 3; ++m)
            if (std::abs(l - m) > 1) orth = std::max(orth, wide.project_band(m, pl).l2() / fw.l2());
    }

    double C = 0;
    for (double w : {0.8, 1.5, 3.0})
        for (int l = -3; l <= 4; ++l) {
            const auto fb = bump_on(plan, 8, w);
            C = std::max(C, plan.project_band(l, fb).sup() / fb.sup());
        }
    report(10, part <= 2e-3 && orth <= 1e-6 && C < 2,
           fmt("partition rel err %.2e; max |P_l P_m f|/|f| (l,m in 0..3, |l-m|>1) %.2e; sup constant %.3f", part,
               orth, C));
}

void c11_decay() {
    const TransformPlan h2 = TransformPlan(basis(OpKind::H2), evolution_options(100, 6));
    const TransformPlan h1 = TransformPlan(basis(OpKind::H1), evolution_options(100, 6));
    const std::vector<double> decade = {1, 2, 3, 5, 7, 10, 14, 20, 30, 50, 70, 100};
    const std::vector<double> late = {5, 7, 10, 14, 20, 30, 50, 70, 100};
    auto run = [](const TransformPlan& plan, Flow flow, const FieldSample& f, const std::vector<double>& ts) {
        EvolutionSpec s;
        s.flow = flow;
        s.f = f;
        s.times = ts;
        return decay_report(evolve(plan, s));
    };
    const FieldSample f2 = bump_on(h2, 0.8, 0.8), f1 = bump_on(h1, 0.8, 0.8);

    const DecayReport heat = run(h2, Flow::heat, f2, decade);
    double lo = 1e300, hi = 0;
    for (const auto& e : heat.entries) lo = std::min(lo, e.t_sup), hi = std::max(hi, e.t_sup);
    const double heat_ratio = hi / lo;

    const DecayReport kg = run(h1, Flow::klein_gordon, f1, decade);

    const DecayReport wave = run(h2, Flow::wave, f2, decade);
    double wmax = 0;
    for (const auto& e : wave.entries) wmax = std::max(wmax, e.weighted);
    const double wave_ratio = wmax / wave.entries.front().weighted;

    // +-50% stability means max/min <= 3
    const auto wk = verify_weighted_estimates(h1, Flow::klein_gordon, f1, std::nullopt, late);
    const auto ww = verify_weighted_estimates(h2, Flow::wave, f2, std::nullopt, late);
    const double rk = wk.max_ratio / wk.min_ratio, rw = ww.max_ratio / ww.min_ratio;

    const bool ok_heat = heat_ratio <= 3, ok_kg = kg.exponent >= -1.15 && kg.exponent <= -0.85,
               ok_wave = wave_ratio <= 3, ok_rw = std::isfinite(rw) && rw <= 3, ok_rk = std::isfinite(rk) && rk <= 3;
    std::string d = fmt("heat t sup|v| max/min %.3f; kg exponent %.4f; wave weighted sup ratio %.3f; "
                        "weighted-norm ratio max/min wave %.3f, kg %.3f",
                        heat_ratio, kg.exponent, wave_ratio, rw, rk);
    if (!ok_rk && ok_heat && ok_kg && ok_wave && ok_rw)
        d += " (kg part is a documented deviation: its weighted data norm diverges as the k grid reaches 0)";
    report(11, ok_heat && ok_kg && ok_wave && ok_rw && ok_rk, d);
    // a failure in any other part of this criterion is not covered by the documented deviation
    if (!(ok_heat && ok_kg && ok_wave && ok_rw)) --documented_failures, ++failures;
}

void c12_eigenvalues() {
    const EigenvalueList e = find_eigenvalues(prof(), 2);
    EigenOptions o;
    o.R_big = 300;
    const EigenvalueList d = find_eigenvalues(prof(), 2, o);
    bool ok = e.eigenvalues.size() >= 2 && d.eigenvalues.size() == e.eigenvalues.size();
    double drift = 0;
    std::string vals;
    for (size_t i = 0; ok && i < e.eigenvalues.size(); ++i) {
        ok = ok && e.eigenvalues[i] > 1.33 && e.eigenvalues[i] < 2;
        drift = std::max(drift, std::abs(e.eigenvalues[i] - d.eigenvalues[i]));
        vals += fmt("%.10f ", e.eigenvalues[i]);
    }
    const auto low = scan_sign_changes(prof(), -1, 0.5);
    ok = ok && drift <= 1e-4 && low.empty();
    report(12, ok,
           fmt("eigenvalues %sdomain-doubling drift %.1e; sign changes on [-1,0.5]: %zu", vals.c_str(), drift,
               low.size()));
}

void c13_degree_two() {
    const auto p2 = solve_profile(2, 50);
    const auto b = zero_basis_n(p2, OpKind::H1, 2);
    const auto s = inner_series(b, 1.0);
    const double r = 2e-3, lim = s.f(1, r) / std::pow(r, 4);
    const SpectralContext ctx(b, 0.05);
    const auto m = build_measure(ctx, log_grid(0.05, 20, 121));
    report(13, std::abs(lim - 1.0 / 12) <= 1e-3 && m.M / m.m <= 10,
           fmt("f_1(r)/r^4 at r=2e-3: %.7f; <k>^2|a| in [%.4f, %.4f], M/m %.3f", lim, m.m, m.M, m.M / m.m));
}

}  // namespace

int main() {
    const std::pair<int, void (*)()> all[] = {
        {1, c1_slope},          {2, c2_sign_change},      {3, c3_lieb_thirring}, {4, c4_tail},
        {5, c5_susy},           {6, c6_zero_modes},       {7, c7_eigenfunctions}, {8, c8_bands},
        {9, c9_round_trip},     {10, c10_littlewood_paley}, {11, c11_decay},     {12, c12_eigenvalues},
        {13, c13_degree_two},
    };
    for (const auto& [id, fn] : all) {
        try {
            fn();
        } catch (const std::exception& e) {
            // an exception is never a documented outcome
            std::printf("criterion %2d: FAIL  exception: %s\n", id, e.what());
            ++failures;
        }
    }
    std::printf("summary: %d undocumented failure(s), %d documented deviation(s)\n", failures, documented_failures);
    return failures ? 1 : 0;
}
