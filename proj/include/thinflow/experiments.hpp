// experiments.hpp
//
// Convergence experiments: for a family of band widths eps, solve the flow
// on the band and the limit flow on the curve from matched initial data,
// measure how fast the fiber average of the band solution approaches the
// limit solution, and fit rates.  A second battery measures the static
// averaging estimates (energy-form defect, cubic-pairing defect, extension
// gradient error, fiber deviation, norm comparisons) on manufactured fields
// with an eps-scaled normal profile, so each bound's predicted power of eps
// is visible as a log-log slope.
//
// Per-eps work runs in its own task slot and is internally sequential, so
// sweep outputs are byte-identical for any worker count.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "thinflow/averaging.hpp"
#include "thinflow/csv.hpp"
#include "thinflow/parallel.hpp"
#include "thinflow/rates.hpp"
#include "thinflow/run_config.hpp"
#include "thinflow/surface_solver.hpp"
#include "thinflow/thin_solver.hpp"

namespace thinflow {

// ---------------------------------------------------------------------------
// Initial data families.
//   WellPrepared    - the constant-in-sigma extension of a curve profile.
//   NormalPerturbed - adds an eps^beta-scaled oscillation across the band.
//   SupGrowing      - rescales the profile so sup|u0| = c1 eps^(alpha-1/3),
//                     probing initial data that grow as the band thins.
// Multi-component data rotate the profile by a fixed phase per component so
// the components are genuinely distinct but deterministic.
// ---------------------------------------------------------------------------
enum class InitialDataFamily { WellPrepared, NormalPerturbed, SupGrowing };

struct InitialData {
    InitialDataFamily family = InitialDataFamily::WellPrepared;
    ScalarFunction profile = ScalarFunction::parse("fourier:0.3,0.5,0,0,0.2");
    double amp = 0.1;    // NormalPerturbed amplitude factor
    int k_theta = 3;     // NormalPerturbed oscillation along the curve
    int k_sigma = 1;     // NormalPerturbed oscillation across the band
    double beta = 1.0;   // NormalPerturbed: perturbation size amp * eps^beta
    double c1 = 0.5;     // SupGrowing amplitude
    double alpha = 0.1;  // SupGrowing exponent offset; sup = c1 eps^(alpha-1/3)
};

inline InitialData make_initial_data(const RunConfig& cfg) {
    InitialData init;
    std::string fam = cfg.get_string("init.family", "well_prepared");
    if (fam == "well_prepared")
        init.family = InitialDataFamily::WellPrepared;
    else if (fam == "normal_perturbed")
        init.family = InitialDataFamily::NormalPerturbed;
    else if (fam == "sup_growing")
        init.family = InitialDataFamily::SupGrowing;
    else
        throw ConfigError("config: unknown init.family '" + fam + "'");
    init.profile = ScalarFunction::parse(cfg.get_string("init.profile", "fourier:0.3,0.5,0,0,0.2"));
    init.amp = cfg.get_double("init.amp", 0.1);
    init.k_theta = cfg.get_int("init.k_theta", 3);
    init.k_sigma = cfg.get_int("init.k_sigma", 1);
    init.beta = cfg.get_double("init.beta", 1.0);
    init.c1 = cfg.get_double("init.c1", 0.5);
    init.alpha = cfg.get_double("init.alpha", 0.1);
    return init;
}

namespace detail {
// Per-component phase shift keeps vector-valued data deterministic yet not
// collinear across components.
inline double component_phase(int c) { return 0.7 * c; }
}  // namespace detail

inline ThinField initial_band_field(const ThinGrid& grid, const InitialData& init, int ncomp) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    const double eps = grid.epsilon();
    ThinField u(ncomp, M, K);
    for (int c = 0; c < ncomp; ++c) {
        double phase = detail::component_phase(c);
        for (int j = 0; j < M; ++j) {
            double base = init.profile.value(grid.base().theta(j) + phase);
            for (int k = 0; k < K; ++k) {
                double val = base;
                if (init.family == InitialDataFamily::NormalPerturbed)
                    val += init.amp * std::pow(eps, init.beta) *
                           std::cos(init.k_theta * (grid.base().theta(j) + phase)) *
                           std::cos(kPi * init.k_sigma * grid.sigma(k));
                u.at(c, j, k) = val;
            }
        }
    }
    if (init.family == InitialDataFamily::SupGrowing) {
        double target = init.c1 * std::pow(eps, init.alpha - 1.0 / 3.0);
        double sup = 0.0;
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < K; ++k) {
                double q = 0.0;
                for (int c = 0; c < ncomp; ++c) q += u.at(c, j, k) * u.at(c, j, k);
                sup = std::max(sup, q);
            }
        sup = std::sqrt(sup);
        if (sup <= 0.0) throw ConfigError("initial data: sup-growing profile is identically zero");
        double scale = target / sup;
        for (double& x : u.data) x *= scale;
    }
    return u;
}

inline SurfaceField initial_surface_field(const SurfaceGrid& grid, const InitialData& init,
                                          int ncomp) {
    SurfaceField v(ncomp, grid.m_theta());
    for (int c = 0; c < ncomp; ++c)
        for (int j = 0; j < grid.m_theta(); ++j)
            v.at(c, j) = init.profile.value(grid.theta(j) + detail::component_phase(c));
    return v;
}

// ---------------------------------------------------------------------------
// Error metrics between a band run and a limit run with matched snapshots.
// ---------------------------------------------------------------------------
struct ComparisonErrors {
    double surface_l2 = 0.0;   // max_t || M u - v ||_{L2(curve)}
    double surface_h1 = 0.0;   // ( int_0^T || grad(M u - v) ||^2 )^{1/2}
    double thin_scaled = 0.0;  // eps^{-1/2} (max_t ||u - ext v|| + (int ||grad(u - ext v)||^2)^{1/2})
};

inline ComparisonErrors compare_runs(const ThinGrid& grid, const ThinSolveResult& band,
                                     const std::vector<SurfaceField>& limit_snapshots) {
    if (band.snapshots.size() != limit_snapshots.size())
        throw ConfigError("compare_runs: snapshot counts differ");
    const size_t S = band.snapshots.size();
    if (S == 0) throw ConfigError("compare_runs: no snapshots to compare");

    ComparisonErrors e;
    std::vector<double> h1_sq(S), thin_grad_sq(S);
    double thin_c = 0.0;
    for (size_t i = 0; i < S; ++i) {
        SurfaceField mu = average(grid, band.snapshots[i]);
        SurfaceField diff = mu;
        for (size_t d = 0; d < diff.data.size(); ++d)
            diff.data[d] = mu.data[d] - limit_snapshots[i].data[d];
        e.surface_l2 = std::max(e.surface_l2, norm_surface(grid.base(), diff, NormKind::L2));
        double gn = norm_surface(grid.base(), surface_gradient(grid.base(), diff), NormKind::L2);
        h1_sq[i] = gn * gn;

        ThinField bdiff = band.snapshots[i];
        ThinField ext = extend(grid, limit_snapshots[i]);
        for (size_t d = 0; d < bdiff.data.size(); ++d) bdiff.data[d] -= ext.data[d];
        thin_c = std::max(thin_c, norm_thin(grid, bdiff, NormKind::L2));
        double tg = norm_thin(grid, bdiff, NormKind::H1Seminorm);
        thin_grad_sq[i] = tg * tg;
    }
    auto time_trapz = [&](const std::vector<double>& f) {
        double s = 0.0;
        for (size_t i = 1; i < S; ++i)
            s += 0.5 * (band.snapshot_times[i] - band.snapshot_times[i - 1]) * (f[i] + f[i - 1]);
        return s;
    };
    e.surface_h1 = std::sqrt(time_trapz(h1_sq));
    e.thin_scaled = (thin_c + std::sqrt(time_trapz(thin_grad_sq))) / std::sqrt(grid.epsilon());
    return e;
}

// ---------------------------------------------------------------------------
// Static averaging-estimate battery on manufactured fields.  The band field
//     u(theta, sigma) = cos(2 theta) + eps sin(theta) cos(pi sigma)
// has an O(1) normal derivative and an O(eps) fiber deviation -- the regime
// the averaging estimates address.  Test profiles on the curve are fixed
// low-order trigonometric polynomials.
// ---------------------------------------------------------------------------
inline std::vector<DefectRow> averaging_defect_battery(const ThinDomain& domain, int m_theta,
                                                       int m_sigma) {
    const double eps = domain.epsilon();
    ThinGrid grid(domain, m_theta, m_sigma);
    const int M = m_theta, K = m_sigma;

    ThinField u(1, M, K);
    for (int j = 0; j < M; ++j) {
        double th = grid.base().theta(j);
        for (int k = 0; k < K; ++k)
            u.at(0, j, k) =
                std::cos(2.0 * th) + eps * std::sin(th) * std::cos(kPi * grid.sigma(k));
    }
    SurfaceField eta(1, M), zeta(1, M);
    for (int j = 0; j < M; ++j) {
        double th = grid.base().theta(j);
        eta.at(0, j) = std::cos(th) + 0.3 * std::sin(2.0 * th);
        zeta.at(0, j) = std::sin(th) + 0.3 * std::cos(th);
    }

    // Norms entering the compensations.
    double u_l2 = norm_thin(grid, u, NormKind::L2);
    double u_l4 = norm_thin(grid, u, NormKind::L4);
    double u_h1s = norm_thin(grid, u, NormKind::H1Seminorm);
    double u_h1 = std::sqrt(u_l2 * u_l2 + u_h1s * u_h1s);
    double u_sup = norm_thin(grid, u, NormKind::Sup);
    ThinGradient gu = thin_gradient(grid, u);
    double du_nor = norm_thin(grid, gu.nor, NormKind::L2);
    double eta_grad = norm_surface(grid.base(), surface_gradient(grid.base(), eta), NormKind::L2);
    double zeta_l2 = norm_surface(grid.base(), zeta, NormKind::L2);
    SurfaceField mu = average(grid, u);

    std::vector<DefectRow> rows;
    auto push = [&](const std::string& name, double raw, double comp) {
        rows.push_back({eps, name, raw, comp > 0 ? raw / comp : 0.0});
    };

    // Energy-form defect against an extended test profile.
    push("at_diri", dirichlet_form_defect(grid, u, eta), u_h1 * eta_grad);
    // Cubic-pairing defect.
    push("ave_non", cubic_pairing_defect(grid, u, zeta),
         u_sup * u_sup * (u_l2 + du_nor) * zeta_l2);
    // Gradient of an extension vs the extension of the gradient.
    {
        ThinField ext_eta = extend(grid, eta);
        ThinGradient ge = thin_gradient(grid, ext_eta);
        SurfaceField geta = surface_gradient(grid.base(), eta);
        double s = 0.0;
        for (int j = 0; j < M; ++j)
            for (int k = 0; k < K; ++k) {
                double dtan = ge.tan.at(0, j, k) - geta.at(0, j);
                double dnor = ge.nor.at(0, j, k);
                s += (dtan * dtan + dnor * dnor) * grid.weight(j, k);
            }
        push("code_l2", std::sqrt(s), eta_grad);
    }
    // Fiber deviation from the extended average.
    push("ave_dif", normal_deviation(grid, u), eps * (u_l2 + du_nor));
    // Average vs band norms (weighted so constants in sigma give ratio ~1).
    {
        std::vector<double> g(M), g_l4(M);
        for (int j = 0; j < M; ++j) {
            g[j] = grid.g(j);
            g_l4[j] = std::sqrt(grid.g(j));
        }
        push("ave_l2", weighted_l2_surface(grid.base(), mu, g), u_l2 / std::sqrt(eps));
        push("ave_l4", weighted_l4_surface(grid.base(), mu, g_l4), u_l4 / std::pow(eps, 0.25));
        push("ave_h1", norm_surface(grid.base(), surface_gradient(grid.base(), mu), NormKind::L2),
             (u_h1s + u_l2) / std::sqrt(eps));
    }
    // Exchange of average and tangential gradient.
    {
        SurfaceField lhs = surface_gradient(grid.base(), mu);
        SurfaceField rhs = average_gradient_explicit(grid, u);
        SurfaceField diff = lhs;
        for (size_t d = 0; d < diff.data.size(); ++d) diff.data[d] -= rhs.data[d];
        push("atgr_l2", norm_surface(grid.base(), diff, NormKind::L2), u_h1 / std::sqrt(eps));
    }
    // Fiber-variance defect of the square.
    push("ave_sq", average_square_defect(grid, u), 1.0);
    return rows;
}

// ---------------------------------------------------------------------------
// The sweep driver.
// ---------------------------------------------------------------------------
struct SweepResult {
    std::vector<SweepRow> sweep;
    std::vector<RateRow> rates;
    std::vector<DefectRow> defects;
    std::vector<HygieneRow> hygiene;
};

namespace detail {

struct PerEpsResult {
    std::vector<SweepRow> sweep;
    std::vector<DefectRow> defects;
    std::vector<HygieneRow> hygiene;
};

// Solve band + limit problem for one eps and measure comparison errors.
inline void run_convergence_case(const RunConfig& cfg, double eps, PerEpsResult& out) {
    const int M = cfg.m_theta();
    const int K = cfg.m_sigma();
    const int ref = std::max(1, cfg.get_int("sweep.reference_factor", 2));
    GLParams gl = cfg.make_gl();
    InitialData init = make_initial_data(cfg);
    ThinDomain domain = cfg.make_domain(eps);
    ValidationReport report = domain.validate();
    if (!report.ok)
        throw ConfigError("sweep: domain invalid at epsilon = " + format_double(eps) + ": " +
                          report.summary());

    ThinGrid grid(domain, M, K);
    ThinField u0 = initial_band_field(grid, init, gl.components);
    std::vector<double> snaps = cfg.snapshot_times();
    double T = cfg.final_time();

    ThinSolverConfig tcfg = cfg.make_thin_solver();
    ThinSolveResult band = solve_thin(grid, u0, gl, tcfg, T, snaps);

    // Limit-problem reference on a ref-times finer curve grid with a matching
    // initial average, restricted back to the coarse nodes per snapshot.
    auto solve_reference = [&](int factor, double dt) {
        ThinGrid fine_grid(domain, M * factor, K);
        ThinField u0_fine = initial_band_field(fine_grid, init, gl.components);
        SurfaceField v0_fine = average(fine_grid, u0_fine);
        SurfaceSolverConfig scfg = cfg.make_surface_solver();
        scfg.backend = SurfaceBackend::FiniteDifference;
        scfg.dt = dt;
        std::vector<double> g = thickness_values(fine_grid.base(), domain);
        SurfaceSolveResult limit =
            solve_surface(fine_grid.base(), g, v0_fine, gl, scfg, T, snaps);
        std::vector<SurfaceField> restricted;
        restricted.reserve(limit.snapshots.size());
        for (const auto& s : limit.snapshots) restricted.push_back(restrict_surface(s, M));
        return restricted;
    };

    ComparisonErrors e = compare_runs(grid, band, solve_reference(ref, cfg.dt() / ref));
    out.sweep.push_back({eps, "surface_l2", e.surface_l2});
    out.sweep.push_back({eps, "surface_h1", e.surface_h1});
    out.sweep.push_back({eps, "thin_scaled", e.thin_scaled});

    // Reference-sensitivity hygiene: recompute against an unrefined limit
    // solve; the measured errors should barely move.
    ComparisonErrors ec = compare_runs(grid, band, solve_reference(1, cfg.dt()));
    auto rel = [](double a, double b) {
        double den = std::max(std::abs(a), 1e-300);
        return std::abs(a - b) / den;
    };
    out.hygiene.push_back({"surface_l2_ref_sensitivity_eps=" + format_double(eps), e.surface_l2,
                           ec.surface_l2, rel(e.surface_l2, ec.surface_l2)});
    out.hygiene.push_back({"thin_scaled_ref_sensitivity_eps=" + format_double(eps), e.thin_scaled,
                           ec.thin_scaled, rel(e.thin_scaled, ec.thin_scaled)});
}

}  // namespace detail

// Which batteries a sweep runs.
struct SweepChecks {
    bool convergence = true;  // surface_rate + thin_rate (shared runs)
    bool estimate_rates = true;
};

inline SweepChecks parse_sweep_checks(const RunConfig& cfg) {
    SweepChecks c;
    auto names = cfg.get_string_list("sweep.checks", {"all"});
    bool all = false, conv = false, estimates = false;
    for (const auto& n : names) {
        if (n == "all")
            all = true;
        else if (n == "surface_rate" || n == "thin_rate" || n == "convergence")
            conv = true;
        else if (n == "estimate_rates")
            estimates = true;
        else
            throw ConfigError("config: unknown sweep check '" + n + "'");
    }
    c.convergence = all || conv;
    c.estimate_rates = all || estimates;
    return c;
}

inline SweepResult run_sweep(const RunConfig& cfg, int jobs) {
    SweepChecks checks = parse_sweep_checks(cfg);
    std::vector<double> epsilons = cfg.sweep_epsilons();
    std::vector<double> estimate_eps = cfg.estimate_epsilons();
    std::vector<detail::PerEpsResult> slots(epsilons.size());
    std::vector<std::vector<DefectRow>> estimate_slots(estimate_eps.size());

    if (checks.convergence)
        parallel_for_index(epsilons.size(), jobs, [&](size_t i) {
            detail::run_convergence_case(cfg, epsilons[i], slots[i]);
        });
    if (checks.estimate_rates)
        parallel_for_index(estimate_eps.size(), jobs, [&](size_t i) {
            // The battery has no time stepping, so it can afford resolutions
            // that push the discretization floor far below the smallest
            // defect measured on its eps ladder.
            int mt = std::max(cfg.m_theta(), 512);
            int ms = std::max(cfg.m_sigma(), 64);
            estimate_slots[i] = averaging_defect_battery(cfg.make_domain(estimate_eps[i]), mt, ms);
        });

    SweepResult out;
    for (auto& s : slots) {
        out.sweep.insert(out.sweep.end(), s.sweep.begin(), s.sweep.end());
        out.hygiene.insert(out.hygiene.end(), s.hygiene.begin(), s.hygiene.end());
    }
    for (auto& s : estimate_slots) out.defects.insert(out.defects.end(), s.begin(), s.end());

    auto collect_sweep = [&](const std::string& name) {
        std::vector<double> errs;
        for (double eps : epsilons)
            for (const auto& r : out.sweep)
                if (r.check_name == name && r.epsilon == eps) errs.push_back(r.error_value);
        return errs;
    };
    auto collect_ratio = [&](const std::string& name) {
        std::vector<double> vals;
        for (double eps : estimate_eps)
            for (const auto& r : out.defects)
                if (r.quantity_name == name && r.epsilon == eps)
                    vals.push_back(r.compensated_ratio);
        return vals;
    };
    auto collect_raw = [&](const std::string& name) {
        std::vector<double> vals;
        for (double eps : estimate_eps)
            for (const auto& r : out.defects)
                if (r.quantity_name == name && r.epsilon == eps) vals.push_back(r.raw_value);
        return vals;
    };

    if (checks.convergence) {
        out.rates.push_back({"surface_l2", fit_rate(epsilons, collect_sweep("surface_l2"))});
        out.rates.push_back({"surface_h1", fit_rate(epsilons, collect_sweep("surface_h1"))});
        out.rates.push_back({"thin_scaled", fit_rate(epsilons, collect_sweep("thin_scaled"))});
    }
    if (checks.estimate_rates) {
        out.rates.push_back({"at_diri", fit_rate(estimate_eps, collect_ratio("at_diri"))});
        out.rates.push_back({"ave_non", fit_rate(estimate_eps, collect_ratio("ave_non"))});
        out.rates.push_back({"code_l2", fit_rate(estimate_eps, collect_ratio("code_l2"))});
        out.rates.push_back({"ave_sq", fit_rate(estimate_eps, collect_raw("ave_sq"))});
    }
    return out;
}

}  // namespace thinflow
