#include <glv/evolution.hpp>
#include <glv/spectrum.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace glv;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0, kExitConfig = 2, kExitNumerical = 3;

// ---------------------------------------------------------------------------
// small parsers

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(to_double(trim(tok), what));
    if (v.empty()) throw ConfigError(what + " is empty");
    return v;
}

// lo:hi:n, n points including both ends
std::vector<double> parse_range(const std::string& s, const std::string& what) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(trim(tok));
    if (parts.size() != 3) throw ConfigError(what + " must look like lo:hi:n");
    const double lo = to_double(parts[0], what), hi = to_double(parts[1], what);
    const double n = to_double(parts[2], what);
    if (!(hi > lo) || !(n >= 2) || n != std::floor(n)) throw ConfigError(what + " needs hi > lo and n >= 2");
    std::vector<double> g(static_cast<size_t>(n));
    for (size_t i = 0; i < g.size(); ++i) g[i] = lo + (hi - lo) * double(i) / double(g.size() - 1);
    return g;
}

struct BumpSpec {
    double r0 = 3, w = 1, amp = 1;
};

// bump:r0=3,w=1[,amp=2]
BumpSpec parse_bump(const std::string& s) {
    const std::string head = "bump:";
    if (s.rfind(head, 0) != 0) throw ConfigError("field spec must look like bump:r0=3,w=1 (got '" + s + "')");
    BumpSpec b;
    std::stringstream ss(s.substr(head.size()));
    std::string kv;
    while (std::getline(ss, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("bad field parameter '" + kv + "'");
        const std::string k = trim(kv.substr(0, eq));
        const double v = to_double(trim(kv.substr(eq + 1)), "field parameter " + k);
        if (k == "r0") b.r0 = v;
        else if (k == "w") b.w = v;
        else if (k == "amp") b.amp = v;
        else throw ConfigError("unknown field parameter '" + k + "'");
    }
    if (!(b.w > 0) || !(b.r0 + b.w > 0)) throw ConfigError("bump needs w > 0 and r0 + w > 0");
    return b;
}

std::vector<std::vector<double>> read_csv(const std::string& path, size_t cols) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(trim(tok));
        if (!header_seen) {
            header_seen = true;
            char* end = nullptr;
            std::strtod(f[0].c_str(), &end);
            if (end == f[0].c_str()) continue;  // column names
        }
        if (f.size() < cols) throw ConfigError("'" + path + "': expected " + std::to_string(cols) + " columns");
        std::vector<double> row(cols);
        for (size_t c = 0; c < cols; ++c) row[c] = to_double(f[c], "CSV field in " + path);
        rows.push_back(row);
    }
    if (rows.empty()) throw ConfigError("'" + path + "' holds no data rows");
    return rows;
}

// ---------------------------------------------------------------------------
// output

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Effective options of the subcommand (flags, config file, defaults), minus the ones
// that do not change the numbers.
std::map<std::string, std::string> effective_config(const CLI::App* sub) {
    static const std::set<std::string> skip = {"help", "config", "out", "threads", "json"};
    std::map<std::string, std::string> m;
    for (const CLI::Option* o : sub->get_options()) {
        const std::string name = o->get_single_name();
        if (name.empty() || skip.count(name)) continue;
        std::string v = o->count() ? o->results().back() : o->get_default_str();
        m[name] = v;
    }
    return m;
}

json make_header(const CLI::App* sub) {
    const auto cfg = effective_config(sub);
    std::string canon = sub->get_name() + "\n";
    json c = json::object();
    for (const auto& [k, v] : cfg) {
        canon += k + "=" + v + "\n";
        c[k] = v;
    }
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
    json h;
    h["tool"] = "vortex-spectral";
    h["subcommand"] = sub->get_name();
    h["config_hash"] = hash;
    h["config"] = c;
    return h;
}

class Sink {
public:
    explicit Sink(const std::string& path) : path_(path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ConfigError("cannot write '" + path + "'");
        }
    }
    std::ostream& os() { return path_.empty() ? std::cout : file_; }

private:
    std::string path_;
    std::ofstream file_;
};

void write_csv(const std::string& path, const json& header, const std::vector<std::string>& names,
               const std::vector<std::vector<std::string>>& rows) {
    Sink s(path);
    auto& os = s.os();
    os << "# " << header.dump() << "\n";
    for (size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
    os << "\n";
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
}

void write_json(const std::string& path, const json& header, const json& body) {
    json j;
    j["header"] = header;
    for (const auto& [k, v] : body.items()) j[k] = v;
    Sink s(path);
    s.os() << j.dump(2) << "\n";
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// shared settings

struct Common {
    std::string out;
    int threads = 0;
    std::string op = "H2";
    int degree = 1;
    double rmax_profile = 50;
    double tol = 1e-10;
};

void add_threads(CLI::App* sub, Common& c) {
    sub->add_option("--threads", c.threads, "worker threads (0: VORTEX_SPECTRAL_THREADS or hardware)");
    sub->add_option("--out", c.out, "output path (default stdout)");
}
void add_operator(CLI::App* sub, Common& c) {
    sub->add_option("--operator", c.op, "H1 or H2");
    sub->add_option("--degree", c.degree, "vortex degree n");
    sub->add_option("--profile-rmax", c.rmax_profile, "radius of the profile solve");
}

VortexProfile profile_for(const Common& c, double r_max) {
    if (c.degree < 1 || c.degree > 4) throw ConfigError("degree must lie in [1, 4]");
    Tolerance t;
    t.rel = c.tol;
    t.validate();
    return solve_profile(c.degree, r_max, t);
}

ZeroEnergyBasis basis_for(const Common& c) {
    const Operator op = Operator::parse(c.op, c.degree);
    const VortexProfile p = profile_for(c, c.rmax_profile);
    return zero_basis(p, op);
}

// ---------------------------------------------------------------------------
// reproduce-paper

struct Check {
    std::string group, name;
    double value = 0;
    std::string target;
    bool pass = false;
};

std::vector<Check> reproduce(const std::set<std::string>& only, unsigned threads) {
    std::vector<Check> out;
    auto want = [&](const std::string& g) { return only.empty() || only.count(g); };
    auto add = [&](const std::string& g, const std::string& n, double v, const std::string& t, bool ok) {
        out.push_back({g, n, v, t, ok});
    };
    const VortexProfile p = solve_profile(1, 50);
    if (want("vortex")) {
        add("vortex", "slope U'(0)", p.slope, "0.5832 +- 1e-3", std::abs(p.slope - 0.5832) <= 1e-3);
        add("vortex", "shooting bracket width", p.bracket_width, "<= 1e-10", p.bracket_width <= 1e-10);
    }
    if (want("zero-modes")) {
        for (const auto& b : {zero_basis_H1(p), zero_basis_H2(p)}) {
            double drift = 0;
            for (double r = 0.05; r <= 30; r *= 1.02) drift = std::max(drift, std::abs(b.wronskian(r) - 1));
            add("zero-modes", b.op.name() + " Wronskian drift on [0.05, 30]", drift, "<= 1e-8", drift <= 1e-8);
            if (b.constants) {
                const auto& c = *b.constants;
                const double id = c[1] * c[2] - c[0] * c[3];
                add("zero-modes", "c2 c3 - c1 c4", id, "1/sqrt(2) +- 1e-5", std::abs(id - 1 / std::sqrt(2.0)) <= 1e-5);
            }
        }
    }
    if (want("measure")) {
        std::vector<double> k;
        for (int i = 0; i <= 120; ++i) k.push_back(0.05 * std::pow(400.0, i / 120.0));
        const VortexProfile p2 = solve_profile(2, 50);
        for (const auto& b : {zero_basis_H1(p), zero_basis_H2(p), zero_basis_n(p2, OpKind::H1, 2)}) {
            const SpectralMeasure m = build_measure(b, k, threads);
            const std::string w = b.op.n == 1 ? "<k>|a|" : "<k>^2|a|";
            add("measure", b.op.name() + " " + w + " band M/m on [0.05, 20]", m.M / m.m, "<= 10", m.M / m.m <= 10);
            add("measure", b.op.name() + " Wronskian spread", m.max_spread(), "<= 1e-5", m.max_spread() <= 1e-5);
        }
        const auto s = inner_series(zero_basis_n(p2, OpKind::H1, 2), 1.0);
        const double lim = s.f(1, 2e-3) / std::pow(2e-3, 4);
        add("measure", "H1 n=2 f_1(r)/r^4 at r -> 0", lim, "1/12 +- 1e-3", std::abs(lim - 1.0 / 12) <= 1e-3);
    }
    if (want("lt")) {
        const VortexProfile pf = solve_profile(1, 400);
        const LtBoundResult lt = lt_bound(pf);
        add("lt", "r0", lt.r0, "0.614489 +- 1e-3", std::abs(lt.r0 - 0.614489) <= 1e-3);
        add("lt", "A/6", lt.A / 6, "0.44515 +- 0.005", std::abs(lt.A / 6 - 0.44515) <= 0.005);
        add("lt", "R_tail/6", lt.R_tail / 6, "<= 0.00127", lt.R_tail / 6 <= 0.00127);
        add("lt", "trace bound", lt.trace_bound, "<= 0.446", lt.trace_bound <= 0.446);
        add("lt", "lambda0", lt.lambda0, "1.3326 +- 0.003", std::abs(lt.lambda0 - 1.3326) <= 0.003);
        const TailClaim tc = verify_tail_claim(pf);
        add("lt", "max r^2 (1 - U^2) on [7, 400]", tc.max_value, "in [1.0, 1.1]", tc.max_value >= 1 && tc.max_value <= 1.1);
        std::vector<double> g;
        for (double r = 0.01; r <= 50; r += 1e-3) g.push_back(r);
        const double vmin = susy_positivity(p, g).min_value;
        add("lt", "min V* on [0.01, 50]", vmin, "> 0", vmin > 0);
    }
    if (want("eigenvalues")) {
        const EigenvalueList e = find_eigenvalues(p, 8, {}, threads);
        EigenOptions o2;
        o2.R_big = 300;
        const EigenvalueList e2 = find_eigenvalues(p, 8, o2, threads);
        add("eigenvalues", "count in (1.33, 2)", double(e.eigenvalues.size()), ">= 2", e.eigenvalues.size() >= 2);
        for (size_t i = 0; i < e.eigenvalues.size(); ++i) {
            const double l = e.eigenvalues[i];
            const bool stable = i < e2.eigenvalues.size() && std::abs(e2.eigenvalues[i] - l) <= 1e-4;
            add("eigenvalues", "lambda_" + std::to_string(i + 1), l, "in (1.33, 2), stable 1e-4 under R doubling",
                l > 1.33 && l < 2 && stable);
        }
        const double neg = double(scan_sign_changes(p, -1, 0.5, {}, threads).size());
        add("eigenvalues", "sign changes on [-1, 0.5]", neg, "0", neg == 0);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral toolkit for the linearized Ginzburg-Landau vortex"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value file; flags override it");

    Common c;
    auto* sub_vortex = app.add_subcommand("vortex", "radial vortex profile");
    std::string rgrid = "0:20:401";
    add_threads(sub_vortex, c);
    sub_vortex->add_option("--degree", c.degree, "vortex degree n");
    sub_vortex->add_option("--rmax", c.rmax_profile, "outer radius of the solve");
    sub_vortex->add_option("--tol", c.tol, "relative tolerance");
    sub_vortex->add_option("--rgrid", rgrid, "output radii lo:hi:n");

    auto* sub_zero = app.add_subcommand("zero-modes", "threshold solutions phi0, theta0");
    add_threads(sub_zero, c);
    add_operator(sub_zero, c);
    sub_zero->add_option("--rgrid", rgrid, "output radii lo:hi:n");

    auto* sub_eig = app.add_subcommand("eigenfn", "generalized eigenfunction Phi(r, k)");
    double k_single = 1.0, c_match = 0.5;
    add_threads(sub_eig, c);
    add_operator(sub_eig, c);
    sub_eig->add_option("--k", k_single, "spectral parameter k > 0");
    sub_eig->add_option("--rgrid", rgrid, "output radii lo:hi:n");
    sub_eig->add_option("--c-match", c_match, "inner/outer split k r = c");

    auto* sub_meas = app.add_subcommand("measure", "connection coefficient and spectral density");
    double kmin = 0.02, kmax = 20;
    int nodes = 240;
    add_threads(sub_meas, c);
    add_operator(sub_meas, c);
    sub_meas->add_option("--kmin", kmin, "smallest k");
    sub_meas->add_option("--kmax", kmax, "largest k");
    sub_meas->add_option("--nodes", nodes, "log-spaced k nodes");
    sub_meas->add_option("--c-match", c_match, "inner/outer split k r = c");

    auto* sub_tr = app.add_subcommand("transform", "distorted Fourier transform");
    std::string mode, in_path, fspec;
    double t_rmax = 30, t_kmax = 40;
    int level = 0;
    add_threads(sub_tr, c);
    add_operator(sub_tr, c);
    sub_tr->add_option("mode", mode, "forward, inverse or band")->required()->check(CLI::IsMember({"forward", "inverse", "band"}));
    sub_tr->add_option("--in", in_path, "input CSV: (r, value) or (k, re, im)");
    sub_tr->add_option("--f", fspec, "analytic input, e.g. bump:r0=3,w=1");
    sub_tr->add_option("--rmax", t_rmax, "transform radius");
    sub_tr->add_option("--kmax", t_kmax, "transform bandwidth");
    sub_tr->add_option("--level", level, "dyadic band for mode band");

    auto* sub_ev = app.add_subcommand("evolve", "linear flows by spectral synthesis");
    std::string flow_s = "heat", gspec, times_s = "1,2,5,10,20,50";
    std::string ev_op;
    double ev_kmax = 8;
    add_threads(sub_ev, c);
    sub_ev->add_option("--flow", flow_s, "heat, kg or wave");
    sub_ev->add_option("--operator", ev_op, "H1 or H2 (default: H1 for kg, H2 otherwise)");
    sub_ev->add_option("--f", fspec, "initial datum, e.g. bump:r0=3,w=1")->required();
    sub_ev->add_option("--g", gspec, "initial velocity for kg / wave");
    sub_ev->add_option("--times", times_s, "comma separated output times");
    sub_ev->add_option("--kmax", ev_kmax, "bandwidth");

    auto* sub_dr = app.add_subcommand("decay-report", "decay norms of an evolve output");
    add_threads(sub_dr, c);
    sub_dr->add_option("--in", in_path, "CSV written by evolve")->required();
    sub_dr->add_option("--flow", flow_s, "heat, kg or wave");

    auto* sub_lt = app.add_subcommand("lt-bound", "Lieb-Thirring gap bound for H1");
    double gamma = 2, r1 = 7, tail_c = 2.3;
    add_threads(sub_lt, c);
    sub_lt->add_option("--gamma", gamma, "moment gamma >= 3/2");
    sub_lt->add_option("--r1", r1, "split radius");
    sub_lt->add_option("--tail-constant", tail_c, "bound of 3(1 - U^2) r^2 - 1 beyond r1");

    auto* sub_evs = app.add_subcommand("eigenvalues", "eigenvalues of H1 below 2 by shooting");
    int count = 4;
    double rbig = 150;
    add_threads(sub_evs, c);
    sub_evs->add_option("--count", count, "how many eigenvalues, at most 8");
    sub_evs->add_option("--rbig", rbig, "outer shooting radius");

    auto* sub_rep = app.add_subcommand("reproduce-paper", "table of golden numbers with tolerances");
    std::vector<std::string> only;
    bool as_json = false;
    add_threads(sub_rep, c);
    sub_rep->add_option("--only", only, "groups: vortex, zero-modes, measure, lt, eigenvalues")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::IsMember({"vortex", "zero-modes", "measure", "lt", "eigenvalues"}));
    sub_rep->add_flag("--json", as_json, "JSON instead of a text table");

    // config file entries go in front of the user's flags so the flags win
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    for (size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + long(i));
        }
        if (path.empty()) continue;
        std::ifstream in(path);
        if (!in) {
            std::cerr << "error: cannot read config file '" << path << "'\n";
            return kExitConfig;
        }
        std::vector<std::string> extra;
        std::string line;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: " << path << ":" << ln << ": expected key=value\n";
                return kExitConfig;
            }
            extra.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
        }
        // after the subcommand name
        size_t at = 0;
        for (size_t j = 0; j < args.size(); ++j)
            if (app.get_subcommand_no_throw(args[j])) {
                at = j + 1;
                break;
            }
        if (at == 0) {
            std::cerr << "error: --config needs a subcommand\n";
            return kExitConfig;
        }
        args.insert(args.begin() + long(at), extra.begin(), extra.end());
        break;
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const auto subs = app.get_subcommands();
        std::cerr << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
        return kExitConfig;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        const unsigned threads = resolve_threads(c.threads);
        if (c.threads < 0) throw ConfigError("--threads must be >= 0");
        json header = make_header(sub);

        if (sub == sub_vortex) {
            const VortexProfile p = profile_for(c, c.rmax_profile);
            header["slope"] = p.slope;
            header["bracket_width"] = p.bracket_width;
            std::vector<std::vector<std::string>> rows;
            for (double r : parse_range(rgrid, "--rgrid")) {
                if (r < 0) throw ConfigError("radii must be >= 0");
                const Pt u = p.eval(r);
                rows.push_back({fmt_num(r), fmt_num(u.v), fmt_num(u.d)});
            }
            write_csv(c.out, header, {"r", "U", "dU"}, rows);
        } else if (sub == sub_zero) {
            const ZeroEnergyBasis b = basis_for(c);
            json side;
            if (b.constants) {
                const auto& k = *b.constants;
                side = {{"c1", k[0]}, {"c2", k[1]}, {"c3", k[2]}, {"c4", k[3]}};
            } else {
                side = {{"eta0", b.eta0}};
            }
            header["constants"] = side;
            std::vector<std::vector<std::string>> rows;
            for (double r : parse_range(rgrid, "--rgrid")) {
                if (!(r > 0)) throw ConfigError("zero-mode radii must be positive");
                const Pt f = b.phi0(r), t = b.theta0(r);
                rows.push_back({fmt_num(r), fmt_num(f.v), fmt_num(f.d), fmt_num(t.v), fmt_num(t.d)});
            }
            write_csv(c.out, header, {"r", "phi0", "dphi0", "theta0", "dtheta0"}, rows);
            if (!c.out.empty()) write_json(c.out + ".json", header, side);
        } else if (sub == sub_eig) {
            if (!(k_single > 0)) throw ConfigError("--k must be positive");
            const ZeroEnergyBasis b = basis_for(c);
            const auto grid = parse_range(rgrid, "--rgrid");
            const SpectralContext ctx(b, k_single, c_match);
            const Eigenfunction e = ctx.eigenfunction(k_single, grid.back());
            header["k"] = k_single;
            header["a"] = {e.a_conn.real(), e.a_conn.imag()};
            header["wronskian_spread"] = e.spread;
            std::vector<std::vector<std::string>> rows;
            for (double r : grid) {
                if (r < 0) throw ConfigError("radii must be >= 0");
                const Pt f = e.eval(r);
                rows.push_back({fmt_num(r), fmt_num(f.v), fmt_num(f.d), e.inner_region(r) ? "inner" : "outer"});
            }
            write_csv(c.out, header, {"r", "phi", "dphi", "region"}, rows);
        } else if (sub == sub_meas) {
            if (!(kmin > 0) || !(kmax > kmin) || nodes < 2) throw ConfigError("need 0 < kmin < kmax and nodes >= 2");
            std::vector<double> k(static_cast<size_t>(nodes));
            for (size_t i = 0; i < k.size(); ++i) k[i] = kmin * std::pow(kmax / kmin, double(i) / double(k.size() - 1));
            const SpectralMeasure m = build_measure(basis_for(c), k, threads, c_match);
            header["band"] = {{"weight_degree", m.degree}, {"m", m.m}, {"M", m.M}};
            header["max_wronskian_spread"] = m.max_spread();
            std::vector<std::vector<std::string>> rows;
            for (size_t i = 0; i < m.size(); ++i)
                rows.push_back({fmt_num(m.k[i]), fmt_num(m.a[i].real()), fmt_num(m.a[i].imag()), fmt_num(m.density[i])});
            write_csv(c.out, header, {"k", "re_a", "im_a", "density"}, rows);
        } else if (sub == sub_tr) {
            TransformOptions o;
            o.r_max = t_rmax;
            o.k_max = t_kmax;
            o.threads = threads;
            const TransformPlan plan(basis_for(c), o);
            auto field_input = [&]() {
                if (!fspec.empty() == !in_path.empty()) throw ConfigError("give exactly one of --in and --f");
                if (!fspec.empty()) {
                    const BumpSpec bs = parse_bump(fspec);
                    return plan.sample([&](double r) { return bs.amp * bump(r, bs.r0, bs.w); }, bs.r0 + bs.w);
                }
                const auto rows = read_csv(in_path, 2);
                FieldSample f;
                for (const auto& row : rows) f.r.push_back(row[0]), f.values.push_back(row[1]);
                f.support = f.r.back();
                return plan.resample(f);
            };
            std::vector<std::vector<std::string>> rows;
            if (mode == "forward") {
                const SpectrumSample F = plan.forward(field_input());
                header["truncation_estimate"] = plan.truncation_estimate(F);
                for (size_t j = 0; j < F.size(); ++j)
                    rows.push_back({fmt_num(F.k[j]), fmt_num(F.values[j].real()), fmt_num(F.values[j].imag())});
                write_csv(c.out, header, {"k", "re", "im"}, rows);
            } else {
                FieldSample f;
                if (mode == "inverse") {
                    if (in_path.empty()) throw ConfigError("inverse needs --in with (k, re, im) columns");
                    const auto in = read_csv(in_path, 3);
                    SpectrumSample F;
                    F.op = plan.op();
                    for (const auto& row : in) F.k.push_back(row[0]), F.values.push_back(cplx(row[1], row[2]));
                    if (F.size() != plan.k_grid().size()) throw ConfigError("spectrum does not live on this plan's k grid");
                    for (size_t j = 0; j < F.size(); ++j)
                        if (std::abs(F.k[j] - plan.k_grid().nodes[j]) > 1e-9 * (1 + F.k[j]))
                            throw ConfigError("spectrum does not live on this plan's k grid");
                    F.k = plan.k_grid().nodes;
                    F.w = plan.k_grid().weights;
                    f = plan.inverse(F);
                } else {
                    f = plan.project_band(level, field_input());
                    header["band_support"] = {BandCutoffs::band_support(level).first, BandCutoffs::band_support(level).second};
                }
                for (size_t i = 0; i < f.size(); ++i) rows.push_back({fmt_num(f.r[i]), fmt_num(f.values[i])});
                write_csv(c.out, header, {"r", "value"}, rows);
            }
        } else if (sub == sub_ev) {
            const Flow flow = parse_flow(flow_s);
            const std::string op_s = ev_op.empty() ? (flow == Flow::klein_gordon ? "H1" : "H2") : ev_op;
            c.op = op_s;
            const ZeroEnergyBasis b = basis_for(c);
            const auto times = parse_list(times_s, "--times");
            const BumpSpec fb = parse_bump(fspec);
            std::optional<BumpSpec> gb;
            if (!gspec.empty()) gb = parse_bump(gspec);
            double support = fb.r0 + fb.w;
            if (gb) support = std::max(support, gb->r0 + gb->w);
            const double t_max = *std::max_element(times.begin(), times.end());
            if (t_max > 200) throw ConfigError("times above 200 are outside the supported range");
            TransformOptions o = evolution_options(t_max, support, ev_kmax);
            o.threads = threads;
            const TransformPlan plan(b, o);
            EvolutionSpec spec;
            spec.flow = flow;
            spec.f = plan.sample([&](double r) { return fb.amp * bump(r, fb.r0, fb.w); }, fb.r0 + fb.w);
            if (gb) spec.g = plan.sample([&](double r) { return gb->amp * bump(r, gb->r0, gb->w); }, gb->r0 + gb->w);
            spec.times = times;
            const EvolutionResult res = evolve(plan, spec, threads);
            header["flow"] = flow_name(flow);
            header["operator"] = b.op.name();
            header["truncation_estimate"] = res.truncation;
            if (flow != Flow::heat) header["energy"] = res.energy;
            std::vector<std::vector<std::string>> rows;
            for (size_t it = 0; it < times.size(); ++it)
                for (size_t i = 0; i < res.solutions[it].size(); ++i)
                    rows.push_back({fmt_num(times[it]), fmt_num(res.solutions[it].r[i]), fmt_num(res.solutions[it].values[i])});
            write_csv(c.out, header, {"t", "r", "value"}, rows);
        } else if (sub == sub_dr) {
            const Flow flow = parse_flow(flow_s);
            const auto rows = read_csv(in_path, 3);
            std::vector<double> times;
            std::vector<FieldSample> sols;
            for (const auto& row : rows) {
                if (times.empty() || row[0] != times.back()) {
                    times.push_back(row[0]);
                    sols.emplace_back();
                }
                sols.back().r.push_back(row[1]);
                sols.back().values.push_back(row[2]);
            }
            const DecayReport rep = decay_report(times, sols, flow);
            json entries = json::array();
            for (const auto& e : rep.entries)
                entries.push_back({{"t", e.t}, {"sup", e.sup}, {"t_sup", e.t_sup}, {"weighted_sup", e.weighted}});
            write_json(c.out, header,
                       {{"flow", flow_name(flow)},
                        {"entries", entries},
                        {"exponent", rep.exponent},
                        {"exponent_window_start", rep.exponent_window_start}});
        } else if (sub == sub_lt) {
            const VortexProfile p = solve_profile(1, std::max(400.0, 4 * r1));
            const LtBoundResult r = lt_bound(p, gamma, r1, tail_c);
            const TailClaim tc = verify_tail_claim(p, r1, std::max(400.0, 4 * r1));
            write_json(c.out, header,
                       {{"gamma", r.gamma},
                        {"r0", r.r0},
                        {"r1", r.r1},
                        {"A", r.A},
                        {"A_sensitivity", r.A_sensitivity},
                        {"tail_constant", r.tail_constant},
                        {"R_tail", r.R_tail},
                        {"trace_bound", r.trace_bound},
                        {"lambda0", r.lambda0},
                        {"tail_sup", tc.max_value},
                        {"tail_constant_sharp", r.tail_constant_sharp},
                        {"R_tail_sharp", r.R_tail_sharp},
                        {"trace_bound_sharp", r.trace_bound_sharp},
                        {"lambda0_sharp", r.lambda0_sharp}});
        } else if (sub == sub_evs) {
            if (count < 1 || count > 8) throw ConfigError("--count must lie in [1, 8]");
            const VortexProfile p = solve_profile(1, 50);
            EigenOptions o;
            o.R_big = rbig;
            const EigenvalueList e = find_eigenvalues(p, size_t(count), o, threads);
            if (!e.complete())
                std::cerr << "note: found " << e.eigenvalues.size() << " of " << count
                          << " eigenvalues below the resolvable window " << e.window_hi << "; increase --rbig\n";
            write_json(c.out, header,
                       {{"requested", count},
                        {"R_big", e.R_big},
                        {"window_hi", e.window_hi},
                        {"complete", e.complete()},
                        {"eigenvalues", e.eigenvalues},
                        {"residuals", e.residuals}});
        } else if (sub == sub_rep) {
            const std::set<std::string> groups(only.begin(), only.end());
            const auto checks = reproduce(groups, threads);
            bool all = true;
            for (const auto& k : checks) all = all && k.pass;
            if (as_json) {
                json rows = json::array();
                for (const auto& k : checks)
                    rows.push_back({{"group", k.group}, {"name", k.name}, {"value", num(k.value)}, {"target", k.target}, {"pass", k.pass}});
                write_json(c.out, header, {{"checks", rows}, {"all_pass", all}});
            } else {
                Sink s(c.out);
                auto& os = s.os();
                char line[256];
                for (const auto& k : checks) {
                    std::snprintf(line, sizeof line, "%-4s %-12s %-44s %16.10g  %s\n", k.pass ? "PASS" : "FAIL",
                                  k.group.c_str(), k.name.c_str(), k.value, k.target.c_str());
                    os << line;
                }
                os << (all ? "all checks pass" : "some checks FAILED") << "\n";
            }
            return all ? kExitOk : kExitNumerical;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
