// evolution.hpp
//
// Generic time integration for the semilinear flow
//     diag(mass) du/dt + A u + lambda diag(mass) f(u) = 0,   f(u) = (|u|^2-1)u,
// shared by the band solver and the finite-difference limit solver (they
// differ only in A and mass).  Schemes:
//
//   ImexEuler:        (M/h + A) u+ = (M/h) u - lambda M f(u)
//   SemiImplicitCN:   (M/h + A/2) u+ = (M/h - A/2) u - lambda M f*,
//                     f* extrapolated to the half step from the last two
//                     cubic evaluations (variable-step two-point formula;
//                     plain evaluation on the first step).
//
// The step honors requested snapshot times exactly: the run is cut into
// segments at those times and h is shrunk per segment to land on them.  The
// factorization is reused while h is unchanged.
//
// Stability guard: the explicit cubic step is only monotone for
// h <= max_stable_dt(lambda, sup|u0|); larger requests are refused up front.
// Non-finite state aborts with a diagnostic.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "thinflow/ginzburg_landau.hpp"
#include "thinflow/linear_system.hpp"

namespace thinflow {

enum class TimeScheme { ImexEuler, SemiImplicitCN };

namespace detail {

struct EvolveSpec {
    double lambda = 1.0;
    bool reaction_off = false;  // test hook: drop the reaction term entirely
    TimeScheme scheme = TimeScheme::ImexEuler;
    double dt = 1e-3;
    LinearSolverSpec linear;
};

struct EvolveResult {
    std::vector<double> state;
    EnergyTrace trace;
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> snapshots;
};

// Merge {0, snapshot times, T} into ordered segment boundaries; flag which
// boundaries must be recorded.
inline void build_schedule(double T, const std::vector<double>& requested,
                           std::vector<double>& boundaries, std::vector<bool>& record) {
    std::vector<double> snaps = requested;
    std::sort(snaps.begin(), snaps.end());
    for (double s : snaps)
        if (s < -1e-12 || s > T * (1.0 + 1e-12) + 1e-300)
            throw ConfigError("snapshot time " + format_double(s) + " outside [0, T]");
    boundaries.clear();
    record.clear();
    boundaries.push_back(0.0);
    record.push_back(false);
    auto push = [&](double t, bool rec) {
        if (t - boundaries.back() > 1e-12 * std::max(1.0, T)) {
            boundaries.push_back(t);
            record.push_back(rec);
        } else if (rec) {
            record.back() = true;
        }
    };
    for (double s : snaps) {
        if (s <= 1e-12 * std::max(1.0, T)) {
            record.front() = true;
            continue;
        }
        push(std::min(s, T), true);
    }
    push(T, false);
}

inline double sup_vector_norm(const std::vector<double>& u, int ncomp, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double q = 0.0;
        for (int c = 0; c < ncomp; ++c) q += u[c * n + i] * u[c * n + i];
        s = std::max(s, q);
    }
    return std::sqrt(s);
}

inline EvolveResult evolve(const SpMat& A, const std::vector<double>& mass, int ncomp,
                           const std::vector<double>& u0, const EvolveSpec& spec, double T,
                           const std::vector<double>& snapshot_times) {
    const size_t n = mass.size();
    if (u0.size() != n * ncomp) throw ConfigError("evolve: state size mismatch");
    if (!(T >= 0.0)) throw ConfigError("evolve: negative final time");
    if (!(spec.dt > 0.0)) throw ConfigError("evolve: dt must be positive");
    if (!all_finite(u0)) throw NumericalError("evolve: initial state is not finite");

    const double sup0 = sup_vector_norm(u0, ncomp, n);
    if (!spec.reaction_off) {
        double hmax = max_stable_dt(spec.lambda, sup0);
        if (spec.dt > hmax * (1.0 + 1e-12))
            throw ConfigError("evolve: dt = " + format_double(spec.dt) +
                              " exceeds the explicit-cubic stability bound " +
                              format_double(hmax) + " for sup|u0| = " + format_double(sup0));
    }

    EvolveResult out;
    out.state = u0;

    auto l2sq = [&](const std::vector<double>& u) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double q = 0.0;
            for (int c = 0; c < ncomp; ++c) q += u[c * n + i] * u[c * n + i];
            s += q * mass[i];
        }
        return s;
    };
    auto l4 = [&](const std::vector<double>& u) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double q = 0.0;
            for (int c = 0; c < ncomp; ++c) q += u[c * n + i] * u[c * n + i];
            s += q * q * mass[i];
        }
        return s;
    };
    auto dirichlet = [&](const std::vector<double>& u) {
        double s = 0.0;
        for (int c = 0; c < ncomp; ++c) {
            Eigen::Map<const Eigen::VectorXd> uc(u.data() + c * n, n);
            s += uc.dot(A * uc);
        }
        return s;
    };
    auto cubic_field = [&](const std::vector<double>& u, std::vector<double>& f) {
        f.assign(n * ncomp, 0.0);
        if (spec.reaction_off) return;
        std::vector<double> uu(ncomp);
        for (size_t i = 0; i < n; ++i) {
            double q = 0.0;
            for (int c = 0; c < ncomp; ++c) {
                uu[c] = u[c * n + i];
                q += uu[c] * uu[c];
            }
            for (int c = 0; c < ncomp; ++c) f[c * n + i] = (q - 1.0) * uu[c];
        }
    };

    EnergyTrace::Row row{0.0, l2sq(out.state), 0.0, 0.0, sup_vector_norm(out.state, ncomp, n)};
    out.trace.rows.push_back(row);

    std::vector<double> boundaries;
    std::vector<bool> record;
    build_schedule(T, snapshot_times, boundaries, record);
    if (record.front()) {
        out.snapshot_times.push_back(0.0);
        out.snapshots.push_back(out.state);
    }

    ImplicitSolve implicit;
    double h_current = -1.0;
    double h_prev = -1.0;  // step size used for the previous completed step
    std::vector<double> f_prev;  // cubic at the previous step's start
    bool have_prev = false;

    std::vector<double> f_now, rhs_flat(n * ncomp);
    double t = 0.0;

    for (size_t seg = 1; seg < boundaries.size(); ++seg) {
        double span = boundaries[seg] - boundaries[seg - 1];
        if (span <= 0) continue;
        int steps = std::max(1, static_cast<int>(std::ceil(span / spec.dt - 1e-9)));
        double h = span / steps;
        if (h != h_current) {
            double coef = (spec.scheme == TimeScheme::ImexEuler) ? 1.0 : 0.5;
            implicit.prepare(A, mass, 1.0 / h, coef, spec.linear);
            h_current = h;
        }
        for (int s = 0; s < steps; ++s) {
            cubic_field(out.state, f_now);
            // Explicit part of the right-hand side.
            if (spec.scheme == TimeScheme::ImexEuler) {
                for (int c = 0; c < ncomp; ++c)
                    for (size_t i = 0; i < n; ++i) {
                        size_t idx = c * n + i;
                        rhs_flat[idx] =
                            mass[i] * (out.state[idx] / h - spec.lambda * f_now[idx]);
                    }
            } else {
                // Cubic extrapolated to the half step; diffusion trapezoidal.
                double rho = have_prev ? h / h_prev : 0.0;
                double c_now = have_prev ? 1.0 + 0.5 * rho : 1.0;
                double c_prev = have_prev ? -0.5 * rho : 0.0;
                for (int c = 0; c < ncomp; ++c) {
                    Eigen::Map<const Eigen::VectorXd> uc(out.state.data() + c * n, n);
                    Eigen::VectorXd Au = A * uc;
                    for (size_t i = 0; i < n; ++i) {
                        size_t idx = c * n + i;
                        double fhat = c_now * f_now[idx] + (have_prev ? c_prev * f_prev[idx] : 0.0);
                        rhs_flat[idx] = mass[i] * (out.state[idx] / h - spec.lambda * fhat) -
                                        0.5 * Au[static_cast<Eigen::Index>(i)];
                    }
                }
            }
            for (int c = 0; c < ncomp; ++c) {
                Eigen::Map<const Eigen::VectorXd> rc(rhs_flat.data() + c * n, n);
                Eigen::VectorXd x = implicit.solve(rc);
                std::copy(x.data(), x.data() + n, out.state.begin() + c * n);
            }
            f_prev = f_now;
            h_prev = h;
            have_prev = true;
            // Land the last step of the segment on the boundary exactly, so
            // trace rows align bitwise with the recorded snapshot times.
            t = (s + 1 == steps) ? boundaries[seg] : boundaries[seg - 1] + (s + 1) * h;

            EnergyTrace::Row r;
            r.t = t;
            r.l2sq = l2sq(out.state);
            r.cum_dirichlet = out.trace.rows.back().cum_dirichlet + h * dirichlet(out.state);
            r.cum_l4 = out.trace.rows.back().cum_l4 + h * l4(out.state);
            r.sup = sup_vector_norm(out.state, ncomp, n);
            out.trace.rows.push_back(r);
            if (!std::isfinite(r.l2sq) || !std::isfinite(r.sup))
                throw NumericalError("evolve: state became non-finite at t = " +
                                     format_double(t));
        }
        t = boundaries[seg];
        if (record[seg]) {
            out.snapshot_times.push_back(t);
            out.snapshots.push_back(out.state);
        }
    }
    return out;
}

}  // namespace detail
}  // namespace thinflow
