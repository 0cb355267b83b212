// ginzburg_landau.hpp
//
// Shared ingredients of the vector Ginzburg-Landau flow
//     du/dt - Lap u + lambda (|u|^2 - 1) u = 0
// used by both the band solver and the limit-problem solvers: the cubic
// term, its monotonicity identity (the structure behind uniqueness and
// stability of the flow), the explicit-step stability bound, and the energy
// trace with its inequality check
//     ||u(t)||^2 + 2 int_0^t ||grad u||^2 + 2 lambda int_0^t ||u||_{L4}^4
//        <= e^{2 lambda t} ||u(0)||^2.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thinflow/common.hpp"

namespace thinflow {

struct GLParams {
    double lambda = 1.0;
    int components = 1;
};

// Pointwise cubic term f(u) = (|u|^2 - 1) u for one node's component vector.
inline void gl_cubic(const double* u, int ncomp, double* out) {
    double q = 0.0;
    for (int c = 0; c < ncomp; ++c) q += u[c] * u[c];
    for (int c = 0; c < ncomp; ++c) out[c] = (q - 1.0) * u[c];
}

// Monotonicity identity and lower bound for the cubic difference:
//     (|a|^2 a - |b|^2 b) . (a - b)  =  |a|^4 - (|a|^2+|b|^2)(a.b) + |b|^4
//                                   >= (|a|^3 - |b|^3)(|a| - |b|)  >=  0.
// The first equality is algebraic; the chain of inequalities is what makes
// the cubic term dissipative in difference estimates.
struct MonotonicityTerms {
    double product;      // (|a|^2 a - |b|^2 b) . (a - b)
    double expanded;     // |a|^4 - (|a|^2+|b|^2)(a.b) + |b|^4
    double lower_bound;  // (|a|^3 - |b|^3)(|a| - |b|)
};

inline MonotonicityTerms cubic_monotonicity(const double* a, const double* b, int ncomp) {
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (int c = 0; c < ncomp; ++c) {
        aa += a[c] * a[c];
        bb += b[c] * b[c];
        ab += a[c] * b[c];
    }
    MonotonicityTerms t;
    t.product = 0.0;
    for (int c = 0; c < ncomp; ++c) {
        double da = aa * a[c] - bb * b[c];
        t.product += da * (a[c] - b[c]);
    }
    t.expanded = aa * aa - (aa + bb) * ab + bb * bb;
    double na = std::sqrt(aa), nb = std::sqrt(bb);
    t.lower_bound = (na * na * na - nb * nb * nb) * (na - nb);
    return t;
}

// Largest explicit-cubic step that keeps the map u -> u - lambda dt f(u)
// monotone on { |u| <= max(1, sup|u0|) }; the solvers refuse larger dt.
inline double max_stable_dt(double lambda, double sup_u0) {
    if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
    double c = std::max(1.0, sup_u0);
    return 0.5 / (lambda * (3.0 * c * c + 1.0));
}

// ---------------------------------------------------------------------------
// Energy trace: per-step record of the quantities entering the energy
// inequality.  Cumulative time integrals use the right-endpoint rule, which
// matches the discrete estimate satisfied by the implicit-diffusion step.
// For the limit problem the entries carry the thickness weight
// (||g^{1/2} v||^2, int ||g^{1/2} grad v||^2, int ||g^{1/4} v||_{L4}^4);
// for the band they are plain L2(band) quantities.
// ---------------------------------------------------------------------------
struct EnergyTrace {
    struct Row {
        double t;
        double l2sq;           // ||u(t)||^2
        double cum_dirichlet;  // int_0^t ||grad u||^2
        double cum_l4;         // int_0^t ||u||_{L4}^4
        double sup;            // ||u(t)||_sup
    };
    std::vector<Row> rows;

    bool finite() const {
        for (const Row& r : rows)
            if (!std::isfinite(r.l2sq) || !std::isfinite(r.cum_dirichlet) ||
                !std::isfinite(r.cum_l4) || !std::isfinite(r.sup))
                return false;
        return true;
    }

    double max_sup() const {
        double s = 0.0;
        for (const Row& r : rows) s = std::max(s, r.sup);
        return s;
    }
};

// Worst ratio  (l2sq + 2 cum_dirichlet + 2 lambda cum_l4) / (e^{2 lambda t} l2sq(0))
// over the trace.  A scheme-accurate run keeps this <= 1 + O(dt).
inline double energy_slack(const EnergyTrace& trace, double lambda) {
    if (trace.rows.empty()) return 0.0;
    if (!trace.finite()) return std::numeric_limits<double>::infinity();
    double e0 = trace.rows.front().l2sq;
    double worst = 0.0;
    for (const auto& r : trace.rows) {
        double lhs = r.l2sq + 2.0 * r.cum_dirichlet + 2.0 * lambda * r.cum_l4;
        double rhs = std::exp(2.0 * lambda * r.t) * e0;
        if (rhs <= 0.0) {
            // Zero initial data: the flow must stay at zero.
            if (lhs > 1e-28) return std::numeric_limits<double>::infinity();
            continue;
        }
        worst = std::max(worst, lhs / rhs);
    }
    return worst;
}

}  // namespace thinflow
