// surface_solver.hpp
//
// Solvers for the thickness-weighted limit flow on the closed curve:
//     g dv/dt - div_G(g grad_G v) + lambda g (|v|^2 - 1) v = 0,
// where grad_G is the arclength derivative and g > 0 the relative thickness.
//
// Two backends:
//   FiniteDifference - the weighted 1D cell stiffness plus lumped mass,
//                      advanced by the shared implicit-explicit integrator.
//   Galerkin         - a low-mode trigonometric space, orthonormalized by
//                      twice-iterated Gram-Schmidt under the quadrature
//                      inner product (optionally g-weighted), advanced by
//                      classical RK4 with an explicit stability guard.
//
// Both record the g-weighted energy trace (||g^{1/2} v||^2, the weighted
// Dirichlet integral, ||g^{1/4} v||_{L^4}^4), so the same energy_slack()
// check applies to either backend.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "thinflow/evolution.hpp"
#include "thinflow/grid.hpp"

namespace thinflow {

enum class SurfaceBackend { FiniteDifference, Galerkin };

struct SurfaceSolverConfig {
    SurfaceBackend backend = SurfaceBackend::FiniteDifference;
    TimeScheme scheme = TimeScheme::ImexEuler;  // finite-difference backend only
    double dt = 1e-3;
    int galerkin_modes = 16;     // L: the space spans {1, cos k8, sin k8 : k <= L}
    bool weighted_basis = true;  // orthonormalize under the g-weighted product
    bool linear_only = false;    // test hook: pure diffusion, reaction dropped
    LinearSolverSpec linear;
};

struct SurfaceSolveResult {
    SurfaceField final;
    EnergyTrace trace;
    std::vector<double> snapshot_times;
    std::vector<SurfaceField> snapshots;
};

// Node values of the relative thickness g = g1 - g0 on a curve grid.
inline std::vector<double> thickness_values(const SurfaceGrid& grid, const ThinDomain& domain) {
    std::vector<double> g(grid.m_theta());
    for (int j = 0; j < grid.m_theta(); ++j) g[j] = domain.g(grid.theta(j));
    return g;
}

// ---------------------------------------------------------------------------
// Trigonometric Galerkin space.  Raw modes 1, cos k8, sin k8 (k <= L) are
// orthonormalized in lockstep with their derivatives, so synthesized fields
// and their theta-derivatives stay exactly consistent.  Requesting more
// modes than the grid resolves (2L+1 > m_theta/2) is refused: beyond that
// the quadrature product aliases distinct modes together.
// ---------------------------------------------------------------------------
class GalerkinBasis {
  public:
    static GalerkinBasis build(const SurfaceGrid& grid, const std::vector<double>& g, int modes,
                               bool weighted) {
        if (modes < 0) throw ConfigError("galerkin basis: negative mode count");
        const int M = grid.m_theta();
        const int R = 2 * modes + 1;
        if (R > M / 2)
            throw ConfigError("galerkin basis: " + std::to_string(R) +
                              " modes alias on a grid with m_theta = " + std::to_string(M) +
                              " (need 2L+1 <= m_theta/2)");
        GalerkinBasis b;
        b.m_theta_ = M;
        b.size_ = R;
        b.weight_.resize(M);
        for (int j = 0; j < M; ++j)
            b.weight_[j] = (weighted ? g[j] : 1.0) * grid.weight(j);

        b.values_.assign(static_cast<size_t>(R) * M, 0.0);
        b.dvalues_.assign(static_cast<size_t>(R) * M, 0.0);
        for (int j = 0; j < M; ++j) {
            double th = grid.theta(j);
            b.values_[j] = 1.0;
            for (int k = 1; k <= modes; ++k) {
                b.values_[static_cast<size_t>(2 * k - 1) * M + j] = std::cos(k * th);
                b.dvalues_[static_cast<size_t>(2 * k - 1) * M + j] = -k * std::sin(k * th);
                b.values_[static_cast<size_t>(2 * k) * M + j] = std::sin(k * th);
                b.dvalues_[static_cast<size_t>(2 * k) * M + j] = k * std::cos(k * th);
            }
        }

        // Modified Gram-Schmidt with reorthogonalization; the same combination
        // coefficients are applied to the derivative rows.
        for (int l = 0; l < R; ++l) {
            double* vl = b.row(l);
            double* dl = b.drow(l);
            for (int pass = 0; pass < 2; ++pass)
                for (int p = 0; p < l; ++p) {
                    const double* vp = b.row(p);
                    const double* dp = b.drow(p);
                    double c = 0.0;
                    for (int j = 0; j < M; ++j) c += vl[j] * vp[j] * b.weight_[j];
                    for (int j = 0; j < M; ++j) {
                        vl[j] -= c * vp[j];
                        dl[j] -= c * dp[j];
                    }
                }
            double nrm2 = 0.0;
            for (int j = 0; j < M; ++j) nrm2 += vl[j] * vl[j] * b.weight_[j];
            if (!(nrm2 > 1e-24))
                throw NumericalError("galerkin basis: degenerate mode during orthonormalization");
            double inv = 1.0 / std::sqrt(nrm2);
            for (int j = 0; j < M; ++j) {
                vl[j] *= inv;
                dl[j] *= inv;
            }
        }
        return b;
    }

    int size() const { return size_; }
    int m_theta() const { return m_theta_; }
    double value(int l, int j) const { return values_[static_cast<size_t>(l) * m_theta_ + j]; }
    double dvalue(int l, int j) const { return dvalues_[static_cast<size_t>(l) * m_theta_ + j]; }
    const std::vector<double>& ortho_weight() const { return weight_; }

    // Worst deviation of the Gram matrix from the identity.
    double gram_error() const {
        double worst = 0.0;
        for (int a = 0; a < size_; ++a)
            for (int b2 = a; b2 < size_; ++b2) {
                double dot = 0.0;
                for (int j = 0; j < m_theta_; ++j) dot += value(a, j) * value(b2, j) * weight_[j];
                worst = std::max(worst, std::abs(dot - (a == b2 ? 1.0 : 0.0)));
            }
        return worst;
    }

    // Orthogonal projection onto the space: coefficients component-major.
    std::vector<double> project(const SurfaceField& v) const {
        if (v.m_theta != m_theta_) throw ConfigError("galerkin basis: grid mismatch");
        std::vector<double> a(static_cast<size_t>(size_) * v.components, 0.0);
        for (int c = 0; c < v.components; ++c)
            for (int l = 0; l < size_; ++l) {
                double dot = 0.0;
                for (int j = 0; j < m_theta_; ++j) dot += v.at(c, j) * value(l, j) * weight_[j];
                a[static_cast<size_t>(c) * size_ + l] = dot;
            }
        return a;
    }

    SurfaceField synthesize(const std::vector<double>& a, int ncomp) const {
        SurfaceField v(ncomp, m_theta_);
        for (int c = 0; c < ncomp; ++c)
            for (int j = 0; j < m_theta_; ++j) {
                double s = 0.0;
                for (int l = 0; l < size_; ++l)
                    s += a[static_cast<size_t>(c) * size_ + l] * value(l, j);
                v.at(c, j) = s;
            }
        return v;
    }

    SurfaceField synthesize_derivative(const std::vector<double>& a, int ncomp) const {
        SurfaceField v(ncomp, m_theta_);
        for (int c = 0; c < ncomp; ++c)
            for (int j = 0; j < m_theta_; ++j) {
                double s = 0.0;
                for (int l = 0; l < size_; ++l)
                    s += a[static_cast<size_t>(c) * size_ + l] * dvalue(l, j);
                v.at(c, j) = s;
            }
        return v;
    }

  private:
    double* row(int l) { return values_.data() + static_cast<size_t>(l) * m_theta_; }
    double* drow(int l) { return dvalues_.data() + static_cast<size_t>(l) * m_theta_; }

    int m_theta_ = 0;
    int size_ = 0;
    std::vector<double> weight_;
    std::vector<double> values_;
    std::vector<double> dvalues_;
};

// Slack of the weighted energy inequality on a Galerkin (or any) trace;
// values near 1 certify the run, values above ~1.05 flag it.
inline double galerkin_energy_check(const EnergyTrace& trace, double lambda) {
    return energy_slack(trace, lambda);
}

namespace detail {

inline SurfaceSolveResult solve_surface_fd(const SurfaceGrid& grid, const std::vector<double>& g,
                                           const SurfaceField& v0, const GLParams& gl,
                                           const SurfaceSolverConfig& cfg, double T,
                                           const std::vector<double>& snapshot_times) {
    SpMat A = assemble_surface_stiffness(grid, g);
    std::vector<double> mass = surface_lumped_mass(grid, g);

    EvolveSpec spec;
    spec.lambda = gl.lambda;
    spec.reaction_off = cfg.linear_only;
    spec.scheme = cfg.scheme;
    spec.dt = cfg.dt;
    spec.linear = cfg.linear;
    EvolveResult ev = evolve(A, mass, v0.components, v0.data, spec, T, snapshot_times);

    SurfaceSolveResult out;
    out.final = SurfaceField(v0.components, grid.m_theta());
    out.final.data = std::move(ev.state);
    out.trace = std::move(ev.trace);
    out.snapshot_times = std::move(ev.snapshot_times);
    out.snapshots.reserve(ev.snapshots.size());
    for (auto& s : ev.snapshots) {
        SurfaceField f(v0.components, grid.m_theta());
        f.data = std::move(s);
        out.snapshots.push_back(std::move(f));
    }
    return out;
}

inline SurfaceSolveResult solve_surface_galerkin(const SurfaceGrid& grid,
                                                 const std::vector<double>& g,
                                                 const SurfaceField& v0, const GLParams& gl,
                                                 const SurfaceSolverConfig& cfg, double T,
                                                 const std::vector<double>& snapshot_times) {
    const int M = grid.m_theta();
    const int ncomp = v0.components;
    GalerkinBasis basis = GalerkinBasis::build(grid, g, cfg.galerkin_modes, cfg.weighted_basis);
    const int R = basis.size();

    // Equation matrices in the orthonormal basis: mass (g m dtheta) and the
    // weighted Dirichlet form ((g/m) dphi dphi dtheta).
    Eigen::MatrixXd Mgal = Eigen::MatrixXd::Zero(R, R);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(R, R);
    const double dth = grid.dtheta();
    for (int j = 0; j < M; ++j) {
        double wm = g[j] * grid.metric(j) * dth;
        double wk = g[j] / grid.metric(j) * dth;
        for (int a = 0; a < R; ++a) {
            double va = basis.value(a, j), da = basis.dvalue(a, j);
            for (int b = a; b < R; ++b) {
                Mgal(a, b) += va * basis.value(b, j) * wm;
                K(a, b) += da * basis.dvalue(b, j) * wk;
            }
        }
    }
    Mgal = Mgal.selfadjointView<Eigen::Upper>();
    K = K.selfadjointView<Eigen::Upper>();
    Eigen::LLT<Eigen::MatrixXd> llt(Mgal);
    if (llt.info() != Eigen::Success)
        throw NumericalError("galerkin solve: mass matrix is not positive definite");

    // Explicit RK4 stability: the diffusion block needs dt within the real
    // stability interval (|z| <= 2.78 on the negative axis) of the largest
    // generalized eigenvalue of (Mgal, K); the reaction adds the usual cubic
    // bound.  Estimate the eigenvalue by power iteration.
    {
        Eigen::VectorXd x = Eigen::VectorXd::Ones(R);
        for (int i = 0; i < R; ++i) x[i] = 1.0 / (1.0 + i);
        double mu = 0.0;
        for (int it = 0; it < 60; ++it) {
            Eigen::VectorXd y = llt.solve(K * x);
            double nrm = y.norm();
            if (nrm <= 0) break;
            mu = x.dot(K * x) / x.dot(Mgal * x);
            x = y / nrm;
        }
        double bound = (mu > 0) ? 2.7 / mu : std::numeric_limits<double>::infinity();
        if (!cfg.linear_only) {
            double sup0 = 0.0;
            for (int j = 0; j < M; ++j) {
                double q = 0.0;
                for (int c = 0; c < ncomp; ++c) q += v0.at(c, j) * v0.at(c, j);
                sup0 = std::max(sup0, q);
            }
            bound = std::min(bound, 4.0 * max_stable_dt(gl.lambda, std::sqrt(sup0)));
        }
        if (cfg.dt > bound * (1.0 + 1e-12))
            throw ConfigError("galerkin solve: dt = " + format_double(cfg.dt) +
                              " exceeds the RK4 stability bound " + format_double(bound));
    }

    std::vector<double> a = basis.project(v0);

    // Right-hand side of Mgal da/dt = -K a - lambda b(a).
    auto deriv = [&](const std::vector<double>& coef) {
        std::vector<double> out(coef.size());
        SurfaceField v = basis.synthesize(coef, ncomp);
        for (int c = 0; c < ncomp; ++c) {
            Eigen::Map<const Eigen::VectorXd> ac(coef.data() + static_cast<size_t>(c) * R, R);
            Eigen::VectorXd rhs = -(K * ac);
            if (!cfg.linear_only && gl.lambda != 0.0) {
                for (int l = 0; l < R; ++l) {
                    double b = 0.0;
                    for (int j = 0; j < M; ++j) {
                        double q = 0.0;
                        for (int cc = 0; cc < ncomp; ++cc) q += v.at(cc, j) * v.at(cc, j);
                        b += basis.value(l, j) * (q - 1.0) * v.at(c, j) * g[j] *
                             grid.metric(j) * dth;
                    }
                    rhs[l] -= gl.lambda * b;
                }
            }
            Eigen::VectorXd x = llt.solve(rhs);
            std::copy(x.data(), x.data() + R, out.begin() + static_cast<size_t>(c) * R);
        }
        return out;
    };

    auto axpy = [](const std::vector<double>& x, double s, const std::vector<double>& y) {
        std::vector<double> r(x.size());
        for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + s * y[i];
        return r;
    };

    SurfaceSolveResult out;
    auto record_row = [&](double t, double cum_diri, double cum_l4) {
        EnergyTrace::Row r;
        r.t = t;
        r.l2sq = 0.0;
        double diri = 0.0;
        for (int c = 0; c < ncomp; ++c) {
            Eigen::Map<const Eigen::VectorXd> ac(a.data() + static_cast<size_t>(c) * R, R);
            r.l2sq += ac.dot(Mgal * ac);
            diri += ac.dot(K * ac);
        }
        SurfaceField v = basis.synthesize(a, ncomp);
        double l4 = 0.0, sup = 0.0;
        for (int j = 0; j < M; ++j) {
            double q = 0.0;
            for (int c = 0; c < ncomp; ++c) q += v.at(c, j) * v.at(c, j);
            l4 += q * q * g[j] * grid.metric(j) * dth;
            sup = std::max(sup, q);
        }
        r.cum_dirichlet = cum_diri;
        r.cum_l4 = cum_l4;
        r.sup = std::sqrt(sup);
        out.trace.rows.push_back(r);
        if (!std::isfinite(r.l2sq) || !std::isfinite(r.sup))
            throw NumericalError("galerkin solve: state became non-finite at t = " +
                                 format_double(t));
        return std::pair<double, double>(diri, l4);
    };

    record_row(0.0, 0.0, 0.0);

    std::vector<double> boundaries;
    std::vector<bool> record;
    build_schedule(T, snapshot_times, boundaries, record);
    auto snapshot = [&](double t) {
        out.snapshot_times.push_back(t);
        out.snapshots.push_back(basis.synthesize(a, ncomp));
    };
    if (record.front()) snapshot(0.0);

    for (size_t seg = 1; seg < boundaries.size(); ++seg) {
        double span = boundaries[seg] - boundaries[seg - 1];
        if (span <= 0) continue;
        int steps = std::max(1, static_cast<int>(std::ceil(span / cfg.dt - 1e-9)));
        double h = span / steps;
        for (int s = 0; s < steps; ++s) {
            std::vector<double> k1 = deriv(a);
            std::vector<double> k2 = deriv(axpy(a, 0.5 * h, k1));
            std::vector<double> k3 = deriv(axpy(a, 0.5 * h, k2));
            std::vector<double> k4 = deriv(axpy(a, h, k3));
            for (size_t i = 0; i < a.size(); ++i)
                a[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            // Stamp segment ends exactly (same contract as the band stepper).
            double t = (s + 1 == steps) ? boundaries[seg] : boundaries[seg - 1] + (s + 1) * h;
            double cum_diri = out.trace.rows.back().cum_dirichlet;
            double cum_l4 = out.trace.rows.back().cum_l4;
            auto [diri, l4] = record_row(t, 0.0, 0.0);
            out.trace.rows.back().cum_dirichlet = cum_diri + h * diri;
            out.trace.rows.back().cum_l4 = cum_l4 + h * l4;
        }
        if (record[seg]) snapshot(boundaries[seg]);
    }

    out.final = basis.synthesize(a, ncomp);
    return out;
}

}  // namespace detail

// Advance v0 to time T under the chosen backend, recording snapshots at the
// requested times exactly.
inline SurfaceSolveResult solve_surface(const SurfaceGrid& grid, const std::vector<double>& g,
                                        const SurfaceField& v0, const GLParams& gl,
                                        const SurfaceSolverConfig& cfg, double T,
                                        const std::vector<double>& snapshot_times = {}) {
    if (v0.m_theta != grid.m_theta())
        throw ConfigError("solve_surface: field does not match the grid");
    if (static_cast<int>(g.size()) != grid.m_theta())
        throw ConfigError("solve_surface: thickness values do not match the grid");
    for (double gj : g)
        if (!(gj > 0.0)) throw ConfigError("solve_surface: thickness must be positive");
    if (cfg.backend == SurfaceBackend::FiniteDifference)
        return detail::solve_surface_fd(grid, g, v0, gl, cfg, T, snapshot_times);
    return detail::solve_surface_galerkin(grid, g, v0, gl, cfg, T, snapshot_times);
}

}  // namespace thinflow
