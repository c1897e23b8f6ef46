#pragma once

#include <glv/vortex.hpp>

#include <string>

namespace glv {

enum class OpKind { H1, H2 };

// Conjugated half-line operator H = -d^2 + (n^2 - 1/4)/r^2 + sigma - kappa (1 - U^2).
struct Operator {
    OpKind kind = OpKind::H2;
    int n = 1;

    static Operator H1(int degree = 1) { return {OpKind::H1, degree}; }
    static Operator H2(int degree = 1) { return {OpKind::H2, degree}; }

    double kappa() const { return kind == OpKind::H1 ? 3.0 : 1.0; }
    double sigma() const { return kind == OpKind::H1 ? 2.0 : 0.0; }
    // log-frequency of the threshold solutions at large r (H1 only)
    double omega() const { return double(n) * std::sqrt(2.0); }

    // potential of H - sigma
    double Q(const VortexProfile& p, double r) const {
        return (double(n) * n - 0.25) / (r * r) - kappa() * p.one_minus_U2(r);
    }

    std::string name() const {
        const std::string base = kind == OpKind::H1 ? "H1" : "H2";
        return n == 1 ? base : base + "n(" + std::to_string(n) + ")";
    }

    static Operator parse(const std::string& s, int degree) {
        if (s == "H1" || s == "h1" || s == "H1n") return H1(degree);
        if (s == "H2" || s == "h2" || s == "H2n") return H2(degree);
        throw ConfigError("unknown operator '" + s + "' (expected H1 or H2)");
    }

    bool operator==(const Operator&) const = default;
};

}  // namespace glv
