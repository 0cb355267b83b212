// Experiment layer: rate fitting, deterministic initial-data families, the
// band-vs-limit comparison metrics (pinned by a flat-band closed form), the
// static averaging-defect battery, run configuration parsing, the parallel
// task runner, and bytewise determinism of the sweep across job counts.
#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>

#include "thinflow/experiments.hpp"

using namespace thinflow;
using Catch::Approx;

TEST_CASE("rate fit recovers exact power laws and guards its floor") {
    std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
    SECTION("exact power law") {
        const double p = 1.37, C = 0.8;
        std::vector<double> errs;
        for (double e : eps) errs.push_back(C * std::pow(e, p));
        RateFit fit = fit_rate(eps, errs);
        REQUIRE(fit.ok);
        REQUIRE(fit.points_used == 4);
        REQUIRE(fit.slope == Approx(p).margin(1e-12));
        REQUIRE(fit.intercept == Approx(std::log(C)).margin(1e-12));
        REQUIRE(fit.max_residual < 1e-12);
    }
    SECTION("floor exclusion") {
        // Two points at roundoff level leave too few for a fit.
        RateFit fit = fit_rate(eps, {1e-2, 1e-3, 1e-15, 1e-16});
        REQUIRE_FALSE(fit.ok);
        REQUIRE(fit.points_used == 2);
        // Three survivors are enough.
        RateFit fit3 = fit_rate(eps, {1e-2, 1e-3, 1e-4, 1e-16});
        REQUIRE(fit3.ok);
        REQUIRE(fit3.points_used == 3);
        // Non-finite errors are dropped rather than poisoning the fit.
        RateFit fitn = fit_rate(eps, {1e-2, std::nan(""), 1e-3, 1e-4});
        REQUIRE(fitn.ok);
        REQUIRE(fitn.points_used == 3);
    }
    SECTION("input guards") {
        REQUIRE_THROWS_AS(fit_rate({0.1, 0.2}, {1.0, 2.0, 3.0}), ConfigError);
        REQUIRE_THROWS_AS(fit_rate({0.1, -0.2, 0.3}, {1.0, 2.0, 3.0}), ConfigError);
    }
}

TEST_CASE("initial data families are deterministic closed forms") {
    ThinDomain dom(PlaneCurve::circle(1.0), ScalarFunction::constant(0.0),
                   ScalarFunction::parse("cosine:1,0.3,1"), 0.05);
    ThinGrid grid(dom, 32, 6);
    InitialData init;

    SECTION("well-prepared data is the phase-shifted profile, constant in sigma") {
        ThinField u = initial_band_field(grid, init, 2);
        for (int c = 0; c < 2; ++c)
            for (int j = 0; j < 32; ++j) {
                double expect = init.profile.value(grid.base().theta(j) + 0.7 * c);
                for (int k = 0; k < 6; ++k) REQUIRE(u.at(c, j, k) == expect);
            }
        // The surface seed is the same profile on the curve nodes.
        SurfaceField v = initial_surface_field(grid.base(), init, 2);
        for (int c = 0; c < 2; ++c)
            for (int j = 0; j < 32; ++j)
                REQUIRE(v.at(c, j) == init.profile.value(grid.base().theta(j) + 0.7 * c));
    }
    SECTION("normal perturbation adds the scaled cross-band ripple") {
        init.family = InitialDataFamily::NormalPerturbed;
        init.amp = 0.2;
        init.beta = 1.5;
        init.k_theta = 4;
        init.k_sigma = 2;
        ThinField base = initial_band_field(grid, InitialData{}, 1);
        ThinField u = initial_band_field(grid, init, 1);
        double scale = init.amp * std::pow(grid.epsilon(), init.beta);
        for (int j = 0; j < 32; ++j)
            for (int k = 0; k < 6; ++k) {
                double ripple = scale * std::cos(4.0 * grid.base().theta(j)) *
                                std::cos(kPi * 2.0 * grid.sigma(k));
                REQUIRE(u.at(0, j, k) == Approx(base.at(0, j, k) + ripple).margin(1e-15));
            }
    }
    SECTION("sup-growing data is rescaled to its target sup norm") {
        init.family = InitialDataFamily::SupGrowing;
        init.c1 = 0.7;
        init.alpha = 0.2;
        ThinField u = initial_band_field(grid, init, 2);
        double target = 0.7 * std::pow(grid.epsilon(), 0.2 - 1.0 / 3.0);
        REQUIRE(norm_thin(grid, u, NormKind::Sup) == Approx(target).epsilon(1e-12));
    }
    SECTION("family parsing from configuration") {
        RunConfig cfg = RunConfig::from_text("init.family = sup_growing\ninit.c1 = 0.9\n");
        InitialData parsed = make_initial_data(cfg);
        REQUIRE(parsed.family == InitialDataFamily::SupGrowing);
        REQUIRE(parsed.c1 == 0.9);
        RunConfig bad = RunConfig::from_text("init.family = bogus\n");
        REQUIRE_THROWS_AS(make_initial_data(bad), ConfigError);
    }
}

TEST_CASE("comparison metrics match a flat-band closed form") {
    // On a flat band the average of an extension is exact, so constant offsets
    // d_i between the averaged band run and the limit run are the entire
    // error: surface and scaled band L2 errors both equal max|d_i| sqrt(2 pi)
    // (the thickness weight cancels against the 1/sqrt(eps) scaling), and
    // every gradient term vanishes.
    ThinDomain dom(PlaneCurve::flat_band(kTwoPi), ScalarFunction::constant(0.0),
                   ScalarFunction::constant(1.0), 0.04);
    ThinGrid grid(dom, 24, 6);
    std::vector<double> offsets = {0.3, -0.5, 0.2};

    ThinSolveResult band;
    std::vector<SurfaceField> limit;
    band.snapshot_times = {0.0, 0.5, 1.0};
    for (size_t i = 0; i < offsets.size(); ++i) {
        SurfaceField v(1, 24);
        for (int j = 0; j < 24; ++j)
            v.at(0, j) = (1.0 + 0.1 * i) * std::sin(grid.base().theta(j));
        band.snapshots.push_back(extend(grid, v));
        SurfaceField w = v;
        for (int j = 0; j < 24; ++j) w.at(0, j) += offsets[i];
        limit.push_back(w);
    }
    ComparisonErrors e = compare_runs(grid, band, limit);
    double expect = 0.5 * std::sqrt(kTwoPi);
    REQUIRE(e.surface_l2 == Approx(expect).margin(1e-13));
    REQUIRE(e.thin_scaled == Approx(expect).margin(1e-13));
    REQUIRE(e.surface_h1 < 1e-13);

    REQUIRE_THROWS_AS(compare_runs(grid, band, std::vector<SurfaceField>(2)), ConfigError);
    ThinSolveResult empty;
    REQUIRE_THROWS_AS(compare_runs(grid, empty, {}), ConfigError);
}

TEST_CASE("averaging defect battery reports the full quantity set") {
    ThinDomain dom(PlaneCurve::circle(1.0), ScalarFunction::constant(0.0),
                   ScalarFunction::parse("cosine:1,0.3,1"), 0.05);
    std::vector<DefectRow> rows = averaging_defect_battery(dom, 128, 17);
    std::vector<std::string> want = {"at_diri", "ave_non", "code_l2", "ave_dif", "ave_l2",
                                     "ave_l4",  "ave_h1",  "atgr_l2", "ave_sq"};
    REQUIRE(rows.size() == want.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].quantity_name == want[i]);
        REQUIRE(rows[i].epsilon == 0.05);
        REQUIRE(std::isfinite(rows[i].raw_value));
        REQUIRE(rows[i].raw_value >= 0.0);
        REQUIRE(std::isfinite(rows[i].compensated_ratio));
    }
    // The norm-transport ratios are O(1) by design; the estimate defects are
    // small at this epsilon.
    auto ratio = [&](const std::string& name) {
        for (const auto& r : rows)
            if (r.quantity_name == name) return r.compensated_ratio;
        return -1.0;
    };
    for (const char* name : {"ave_l2", "ave_l4", "ave_h1", "ave_dif"}) {
        REQUIRE(ratio(name) > 0.01);
        REQUIRE(ratio(name) < 100.0);
    }
    for (const char* name : {"at_diri", "ave_non", "code_l2"}) REQUIRE(ratio(name) < 0.1);

    // Halving epsilon shrinks the estimate defects at better than first order
    // (the dedicated ladder in the sweep pins the exact slopes).
    std::vector<DefectRow> finer = averaging_defect_battery(
        ThinDomain(dom.curve(), dom.g0(), dom.g1(), 0.025), 512, 64);
    std::vector<DefectRow> coarse = averaging_defect_battery(
        ThinDomain(dom.curve(), dom.g0(), dom.g1(), 0.05), 512, 64);
    for (size_t i : {size_t(0), size_t(1), size_t(2)})  // at_diri, ave_non, code_l2
        REQUIRE(coarse[i].compensated_ratio / finer[i].compensated_ratio > 2.5);
}

TEST_CASE("run configuration parsing") {
    SECTION("values, comments, defaults, overrides") {
        RunConfig cfg = RunConfig::from_text(
            "# solver setup\n"
            "time.dt = 5e-4   # small step\n"
            "grid.m_theta = 128\n"
            "time.scheme = cn\n"
            "\n"
            "sweep.epsilons = 0.2, 0.1, 0.05\n");
        REQUIRE(cfg.dt() == 5e-4);
        REQUIRE(cfg.m_theta() == 128);
        REQUIRE(cfg.m_sigma() == 32);  // default
        REQUIRE(cfg.make_scheme() == TimeScheme::SemiImplicitCN);
        REQUIRE(cfg.sweep_epsilons() == std::vector<double>{0.2, 0.1, 0.05});
        cfg.apply_override("time.dt=1e-3");
        REQUIRE(cfg.dt() == 1e-3);
        REQUIRE_THROWS_AS(cfg.apply_override("time.dt"), ConfigError);
    }
    SECTION("snapshot schedule") {
        RunConfig cfg = RunConfig::from_text("time.T = 1.0\ntime.snapshots = 5\n");
        REQUIRE(cfg.snapshot_times() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
        RunConfig bad = RunConfig::from_text("time.snapshots = 1\n");
        REQUIRE_THROWS_AS(bad.snapshot_times(), ConfigError);
    }
    SECTION("malformed input is rejected with context") {
        REQUIRE_THROWS_AS(RunConfig::from_text("grid.m_tehta = 4\n"), ConfigError);  // typo key
        REQUIRE_THROWS_WITH(RunConfig::from_text("time.dt = 1e-3\nnot a pair\n"),
                            Catch::Matchers::ContainsSubstring("line 2"));
        RunConfig cfg = RunConfig::from_text("grid.m_theta = twelve\n");
        REQUIRE_THROWS_AS(cfg.m_theta(), ConfigError);
        RunConfig cfg2 = RunConfig::from_text("surface.weighted_basis = maybe\n");
        REQUIRE_THROWS_AS(cfg2.make_surface_solver(), ConfigError);
    }
    SECTION("typed builders") {
        RunConfig cfg = RunConfig::from_text(
            "curve.family = ellipse\ncurve.a = 2.0\ncurve.b = 1.0\n"
            "gl.lambda = 2.5\ngl.components = 2\n"
            "linear.solver = cg\nsurface.backend = galerkin\nsurface.modes = 9\n");
        REQUIRE(cfg.make_curve().family() == PlaneCurve::Family::Ellipse);
        REQUIRE(cfg.make_gl().lambda == 2.5);
        REQUIRE(cfg.make_gl().components == 2);
        REQUIRE(cfg.make_linear().kind == LinearSolverKind::ConjugateGradient);
        SurfaceSolverConfig sc = cfg.make_surface_solver();
        REQUIRE(sc.backend == SurfaceBackend::Galerkin);
        REQUIRE(sc.galerkin_modes == 9);
        REQUIRE_THROWS_AS(RunConfig::from_text("curve.family = square\n").make_curve(),
                          ConfigError);
        REQUIRE_THROWS_AS(RunConfig::from_text("time.scheme = rk9\n").make_scheme(), ConfigError);
        REQUIRE_THROWS_AS(RunConfig::from_text("gl.components = 0\n").make_gl(), ConfigError);
    }
    SECTION("sweep check selection") {
        REQUIRE(parse_sweep_checks(RunConfig::from_text("")).convergence);
        REQUIRE(parse_sweep_checks(RunConfig::from_text("")).estimate_rates);
        SweepChecks only_conv =
            parse_sweep_checks(RunConfig::from_text("sweep.checks = surface_rate\n"));
        REQUIRE(only_conv.convergence);
        REQUIRE_FALSE(only_conv.estimate_rates);
        SweepChecks only_estimates =
            parse_sweep_checks(RunConfig::from_text("sweep.checks = estimate_rates\n"));
        REQUIRE_FALSE(only_estimates.convergence);
        REQUIRE(only_estimates.estimate_rates);
        REQUIRE_THROWS_AS(parse_sweep_checks(RunConfig::from_text("sweep.checks = vibes\n")),
                          ConfigError);
    }
}

TEST_CASE("parallel task runner visits every index once and propagates errors") {
    const size_t count = 100;
    std::vector<std::atomic<int>> hits(count);
    parallel_for_index(count, 4, [&](size_t i) { hits[i].fetch_add(1); });
    for (size_t i = 0; i < count; ++i) REQUIRE(hits[i].load() == 1);

    REQUIRE_THROWS_AS(parallel_for_index(
                          8, 3,
                          [&](size_t i) {
                              if (i == 5) throw ConfigError("boom");
                          }),
                      ConfigError);
}

TEST_CASE("sweep output is identical across job counts") {
    RunConfig cfg = RunConfig::from_text(
        "time.T = 0.05\n"
        "time.dt = 1e-3\n"
        "time.snapshots = 3\n"
        "time.scheme = cn\n"
        "grid.m_theta = 64\n"
        "grid.m_sigma = 12\n"
        "sweep.epsilons = 0.2, 0.1, 0.05\n"
        "sweep.estimate_epsilons = 0.05, 0.025, 0.0125\n");
    SweepResult a = run_sweep(cfg, 1);
    SweepResult b = run_sweep(cfg, 4);

    REQUIRE(a.sweep.size() == 9);  // 3 epsilons x 3 error metrics
    REQUIRE(a.sweep.size() == b.sweep.size());
    for (size_t i = 0; i < a.sweep.size(); ++i) {
        REQUIRE(a.sweep[i].check_name == b.sweep[i].check_name);
        REQUIRE(a.sweep[i].epsilon == b.sweep[i].epsilon);
        REQUIRE(a.sweep[i].error_value == b.sweep[i].error_value);  // bitwise
    }
    REQUIRE(a.rates.size() == 7);  // 3 convergence + 4 estimate slopes
    REQUIRE(a.rates.size() == b.rates.size());
    for (size_t i = 0; i < a.rates.size(); ++i) {
        REQUIRE(a.rates[i].check_name == b.rates[i].check_name);
        REQUIRE(a.rates[i].fit.ok == b.rates[i].fit.ok);
        REQUIRE(a.rates[i].fit.slope == b.rates[i].fit.slope);
    }
    REQUIRE(a.defects.size() == 27);  // 3 ladder points x 9 quantities
    REQUIRE(a.defects.size() == b.defects.size());
    for (size_t i = 0; i < a.defects.size(); ++i) {
        REQUIRE(a.defects[i].raw_value == b.defects[i].raw_value);
        REQUIRE(a.defects[i].compensated_ratio == b.defects[i].compensated_ratio);
    }
    REQUIRE(a.hygiene.size() == b.hygiene.size());
    for (size_t i = 0; i < a.hygiene.size(); ++i)
        REQUIRE(a.hygiene[i].relative_change == b.hygiene[i].relative_change);

    // All errors decrease monotonically with epsilon, and the fitted slopes
    // sit in the expected windows even on this toy resolution.
    for (const auto& r : a.rates) {
        REQUIRE(r.fit.ok);
        if (r.check_name == "surface_l2" || r.check_name == "surface_h1")
            REQUIRE(r.fit.slope == Approx(1.0).margin(0.35));
        if (r.check_name == "thin_scaled") REQUIRE(r.fit.slope > 0.8);
    }

    // Restricting the check set prunes the corresponding outputs.
    RunConfig estimates_only = cfg;
    estimates_only.apply_override("sweep.checks = estimate_rates");
    SweepResult c = run_sweep(estimates_only, 2);
    REQUIRE(c.sweep.empty());
    REQUIRE(c.hygiene.empty());
    REQUIRE(c.rates.size() == 4);
    REQUIRE(c.defects.size() == 27);
}
