// thinflow_cli.cpp
//
// Command-line front end.  Subcommands:
//
//   validate          build the configured band and print the feasibility report
//   solve-thin        run the band flow, write final state / snapshots / trace
//   solve-surface     run the limit flow on the curve, same outputs
//   average INPUT     fiber-average a band field written by solve-thin
//   sweep             epsilon sweep: convergence errors, defect battery, rates
//   check-invariants  quick randomized self-checks of the discrete identities
//
// Exit codes: 0 success, 1 numerical failure (blow-up, non-convergence,
// failed invariant), 2 configuration error (bad key, bad value, infeasible
// geometry, malformed input file).  All file output stays inside --out.
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thinflow/thinflow.hpp"

namespace fs = std::filesystem;
using namespace thinflow;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    int jobs = 1;
    std::vector<std::string> overrides;
};

RunConfig load_config(const GlobalOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) cfg = RunConfig::from_file(opt.config_path);
    for (const auto& o : opt.overrides) cfg.apply_override(o);
    return cfg;
}

fs::path ensure_out_dir(const GlobalOptions& opt) {
    fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

void write_file(const fs::path& p, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw NumericalError("cannot open '" + p.string() + "' for writing");
    writer(os);
    os.flush();
    if (!os) throw NumericalError("write failed for '" + p.string() + "'");
}

// ---------------------------------------------------------------------------

int cmd_validate(const GlobalOptions& opt) {
    RunConfig cfg = load_config(opt);
    ThinDomain domain = cfg.make_domain();
    ValidationReport report = domain.validate();
    std::printf("%s\n", report.summary().c_str());
    for (const auto& m : report.messages) std::printf("  %s\n", m.c_str());
    if (!report.ok) {
        std::fprintf(stderr, "validate: the configured band is not admissible\n");
        return 2;
    }
    return 0;
}

int cmd_solve_thin(const GlobalOptions& opt) {
    RunConfig cfg = load_config(opt);
    fs::path out = ensure_out_dir(opt);
    GLParams gl = cfg.make_gl();
    ThinDomain domain = cfg.make_domain();
    ValidationReport report = domain.validate();
    if (!report.ok) throw ConfigError("solve-thin: " + report.summary());

    ThinGrid grid(domain, cfg.m_theta(), cfg.m_sigma());
    ThinField u0 = initial_band_field(grid, make_initial_data(cfg), gl.components);
    ThinSolveResult res =
        solve_thin(grid, u0, gl, cfg.make_thin_solver(), cfg.final_time(), cfg.snapshot_times());

    write_file(out / "u_final.csv", [&](std::ostream& os) { write_field_csv(os, res.final); });
    write_file(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.trace); });
    write_file(out / "snapshot_times.csv", [&](std::ostream& os) {
        os << "index,t\n";
        for (size_t i = 0; i < res.snapshot_times.size(); ++i)
            os << i << ',' << format_double(res.snapshot_times[i]) << '\n';
    });
    for (size_t i = 0; i < res.snapshots.size(); ++i)
        write_file(out / ("u_snap_" + std::to_string(i) + ".csv"),
                   [&](std::ostream& os) { write_field_csv(os, res.snapshots[i]); });

    double slack = energy_slack(res.trace, gl.lambda);
    std::printf("solve-thin: T=%s steps=%zu energy_slack=%s sup=%s out=%s\n",
                format_double(cfg.final_time()).c_str(), res.trace.rows.size() - 1,
                format_double(slack).c_str(), format_double(res.trace.max_sup()).c_str(),
                out.string().c_str());
    return 0;
}

int cmd_solve_surface(const GlobalOptions& opt) {
    RunConfig cfg = load_config(opt);
    fs::path out = ensure_out_dir(opt);
    GLParams gl = cfg.make_gl();
    ThinDomain domain = cfg.make_domain();
    SurfaceGrid grid(domain.curve(), cfg.m_theta());
    std::vector<double> g = thickness_values(grid, domain);
    SurfaceField v0 = initial_surface_field(grid, make_initial_data(cfg), gl.components);
    SurfaceSolveResult res = solve_surface(grid, g, v0, gl, cfg.make_surface_solver(),
                                           cfg.final_time(), cfg.snapshot_times());

    write_file(out / "v_final.csv", [&](std::ostream& os) { write_field_csv(os, res.final); });
    write_file(out / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.trace); });
    write_file(out / "snapshot_times.csv", [&](std::ostream& os) {
        os << "index,t\n";
        for (size_t i = 0; i < res.snapshot_times.size(); ++i)
            os << i << ',' << format_double(res.snapshot_times[i]) << '\n';
    });
    for (size_t i = 0; i < res.snapshots.size(); ++i)
        write_file(out / ("v_snap_" + std::to_string(i) + ".csv"),
                   [&](std::ostream& os) { write_field_csv(os, res.snapshots[i]); });

    double slack = energy_slack(res.trace, gl.lambda);
    std::printf("solve-surface: T=%s steps=%zu energy_slack=%s sup=%s out=%s\n",
                format_double(cfg.final_time()).c_str(), res.trace.rows.size() - 1,
                format_double(slack).c_str(), format_double(res.trace.max_sup()).c_str(),
                out.string().c_str());
    return 0;
}

int cmd_average(const GlobalOptions& opt, const std::string& input) {
    RunConfig cfg = load_config(opt);
    fs::path out = ensure_out_dir(opt);
    std::ifstream is(input);
    if (!is) throw ConfigError("average: cannot open '" + input + "'");
    LoadedField field = read_field_csv(is);
    if (!field.thin) throw ConfigError("average: '" + input + "' holds a curve field, not a band field");

    ThinDomain domain = cfg.make_domain();
    ThinGrid grid(domain, field.band.m_theta, field.band.m_sigma);
    SurfaceField mu = average(grid, field.band);
    write_file(out / "average.csv", [&](std::ostream& os) { write_field_csv(os, mu); });
    std::printf("average: %dx%d band field -> %d curve nodes, out=%s\n", field.band.m_theta,
                field.band.m_sigma, mu.m_theta, (out / "average.csv").string().c_str());
    return 0;
}

int cmd_sweep(const GlobalOptions& opt) {
    RunConfig cfg = load_config(opt);
    fs::path out = ensure_out_dir(opt);
    SweepResult res = run_sweep(cfg, opt.jobs);

    write_file(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, res.sweep); });
    write_file(out / "rates.csv", [&](std::ostream& os) { write_rates_csv(os, res.rates); });
    write_file(out / "defects.csv", [&](std::ostream& os) { write_defects_csv(os, res.defects); });
    write_file(out / "hygiene.csv", [&](std::ostream& os) { write_hygiene_csv(os, res.hygiene); });

    for (const auto& r : res.rates)
        std::printf("rate %-12s slope=%s points=%d%s\n", r.check_name.c_str(),
                    format_double(r.fit.slope).c_str(), r.fit.points_used,
                    r.fit.ok ? "" : " (insufficient data)");
    std::printf("sweep: wrote %s\n", out.string().c_str());
    return 0;
}

int cmd_check_invariants(const GlobalOptions& opt) {
    RunConfig cfg = load_config(opt);
    ThinDomain domain = cfg.make_domain();
    ValidationReport vr = domain.validate();
    if (!vr.ok) throw ConfigError("check-invariants: " + vr.summary());
    ThinGrid grid(domain, cfg.m_theta(), cfg.m_sigma());
    const int M = grid.m_theta(), K = grid.m_sigma();

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    bool all_ok = true;
    auto report = [&](const char* name, bool ok, double value) {
        std::printf("%s %s (%s)\n", ok ? "PASS" : "FAIL", name, format_double(value).c_str());
        all_ok = all_ok && ok;
    };

    {  // Duality of fiber averaging against constant extension.
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            ThinField u(1, M, K);
            for (double& x : u.data) x = unif(rng);
            SurfaceField eta(1, M);
            for (double& x : eta.data) x = unif(rng);
            worst = std::max(worst, pairing_defect(grid, u, eta).relative);
        }
        report("pairing_identity_relative", worst <= 1e-12, worst);
    }
    {  // Cubic monotonicity: identity and sign on random component pairs.
        double worst_sign = 0.0, worst_id = 0.0;
        for (int rep = 0; rep < 10000; ++rep) {
            int ncomp = 1 + static_cast<int>(rng() % 3);
            double a[3], b[3], scale = 0.0;
            for (int c = 0; c < ncomp; ++c) {
                a[c] = 2.0 * unif(rng);
                b[c] = 2.0 * unif(rng);
                scale = std::max({scale, std::abs(a[c]), std::abs(b[c])});
            }
            double s4 = std::max(scale * scale * scale * scale, 1e-30);
            MonotonicityTerms t = cubic_monotonicity(a, b, ncomp);
            worst_sign = std::max(worst_sign, (t.lower_bound - t.product) / s4);
            worst_sign = std::max(worst_sign, -t.lower_bound / s4);
            worst_id = std::max(worst_id, std::abs(t.product - t.expanded) / s4);
        }
        report("cubic_monotonicity_sign", worst_sign <= 1e-12, worst_sign);
        report("cubic_monotonicity_identity", worst_id <= 1e-12, worst_id);
    }
    {  // Fiber average of the constant 1: closed form per node.
        ThinField one(1, M, K);
        for (double& x : one.data) x = 1.0;
        SurfaceField m1 = average(grid, one);
        double worst = 0.0;
        for (int j = 0; j < M; ++j) {
            double th = grid.base().theta(j);
            double expect = 1.0 - grid.base().frame(j).curvature * domain.epsilon() *
                                      (domain.g0().value(th) + domain.g1().value(th)) / 2.0;
            worst = std::max(worst, std::abs(m1.at(0, j) - expect));
        }
        report("average_of_one_closed_form", worst <= 1e-13, worst);
    }
    {  // Band energy form: kernel holds constants, and it is nonnegative.
        ThinField one(1, M, K);
        for (double& x : one.data) x = 1.0;
        double on_const = std::abs(dirichlet_form_thin(grid, one, one));
        double worst_neg = 0.0;
        for (int rep = 0; rep < 10; ++rep) {
            ThinField u(1, M, K);
            for (double& x : u.data) x = unif(rng);
            worst_neg = std::min(worst_neg, dirichlet_form_thin(grid, u, u));
        }
        report("energy_form_kills_constants", on_const <= 1e-12, on_const);
        report("energy_form_nonnegative", worst_neg >= -1e-12, worst_neg);
    }
    if (!all_ok) {
        std::fprintf(stderr, "check-invariants: at least one identity failed\n");
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Band-flow toolkit: curved thin bands, the Ginzburg-Landau heat flow, "
                 "its thickness-weighted limit on the curve, and convergence measurements"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    GlobalOptions opt;
    app.add_option("--config", opt.config_path, "run configuration file");
    app.add_option("--out", opt.out_dir, "output directory (created if missing)");
    app.add_option("--seed", opt.seed, "seed for randomized checks");
    app.add_option("--jobs", opt.jobs, "worker threads for sweeps");
    app.add_option("--set", opt.overrides, "override a config key, e.g. --set time.dt=5e-4")
        ->type_size(1)
        ->allow_extra_args(false);

    auto* validate = app.add_subcommand("validate", "check the configured band is admissible");
    auto* solve_thin_cmd = app.add_subcommand("solve-thin", "run the band flow");
    auto* solve_surface_cmd = app.add_subcommand("solve-surface", "run the limit flow");
    std::string average_input;
    auto* average_cmd =
        app.add_subcommand("average", "fiber-average a band field CSV onto the curve");
    average_cmd->add_option("input", average_input, "band field CSV")->required();
    auto* sweep_cmd = app.add_subcommand("sweep", "epsilon sweep with rate fits");
    auto* check_cmd =
        app.add_subcommand("check-invariants", "randomized checks of the discrete identities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(opt);
        if (solve_thin_cmd->parsed()) return cmd_solve_thin(opt);
        if (solve_surface_cmd->parsed()) return cmd_solve_surface(opt);
        if (average_cmd->parsed()) return cmd_average(opt, average_input);
        if (sweep_cmd->parsed()) return cmd_sweep(opt);
        if (check_cmd->parsed()) return cmd_check_invariants(opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
