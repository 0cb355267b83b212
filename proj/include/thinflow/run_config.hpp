// run_config.hpp
//
// Key-value run configuration: a small dotted-key file format plus
// command-line overrides.  Lines look like
//
//     # comment
//     curve.family = ellipse
//     curve.a = 1.5
//     sweep.epsilons = 0.2, 0.1, 0.05, 0.025
//
// Every key must be known; a typo raises ConfigError with the offending key
// rather than being silently ignored.  Overrides ("key=value") are applied
// after the file.  Accessors convert on demand and report the key on any
// malformed value.
#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "thinflow/evolution.hpp"
#include "thinflow/geometry.hpp"
#include "thinflow/surface_solver.hpp"
#include "thinflow/thin_solver.hpp"

namespace thinflow {

class RunConfig {
  public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_text(ss.str());
    }

    static RunConfig from_text(const std::string& text) {
        RunConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string t = trim(line);
            if (t.empty()) continue;
            size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config: line " + std::to_string(lineno) +
                                  " is not 'key = value': '" + t + "'");
            cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        }
        return cfg;
    }

    // "key=value" override, e.g. from a --set flag.
    void apply_override(const std::string& assignment) {
        size_t eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: override '" + assignment + "' is not key=value");
        set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return to_double(key, it->second);
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            size_t pos = 0;
            int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' needs an integer, got '" + it->second +
                              "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config: key '" + key + "' needs a boolean, got '" + v + "'");
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        for (const std::string& cell : split_list(it->second))
            out.push_back(to_double(key, cell));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return split_list(it->second);
    }

    // ------------------------------------------------------------------
    // Typed builders for the domain and solver objects.
    // ------------------------------------------------------------------
    PlaneCurve make_curve() const {
        std::string fam = get_string("curve.family", "circle");
        if (fam == "circle") return PlaneCurve::circle(get_double("curve.radius", 1.0));
        if (fam == "ellipse")
            return PlaneCurve::ellipse(get_double("curve.a", 1.5), get_double("curve.b", 1.0));
        if (fam == "fourier") {
            auto params = get_double_list("curve.params", {1.0, 0.0, 0.0, 0.1, 0.0});
            return PlaneCurve::fourier(params);
        }
        if (fam == "flat") return PlaneCurve::flat_band(get_double("curve.length", kTwoPi));
        throw ConfigError("config: unknown curve.family '" + fam + "'");
    }

    ThicknessProfile make_g0() const {
        return ScalarFunction::parse(get_string("domain.g0", "constant:0"));
    }
    ThicknessProfile make_g1() const {
        return ScalarFunction::parse(get_string("domain.g1", "cosine:1,0.3,1"));
    }

    ThinDomain make_domain(double epsilon) const {
        return ThinDomain(make_curve(), make_g0(), make_g1(), epsilon);
    }
    ThinDomain make_domain() const { return make_domain(get_double("domain.epsilon", 0.1)); }

    GLParams make_gl() const {
        GLParams gl;
        gl.lambda = get_double("gl.lambda", 1.0);
        gl.components = get_int("gl.components", 1);
        if (gl.components < 1) throw ConfigError("config: gl.components must be at least 1");
        return gl;
    }

    TimeScheme make_scheme() const {
        std::string s = get_string("time.scheme", "imex");
        if (s == "imex" || s == "imex_euler") return TimeScheme::ImexEuler;
        if (s == "cn" || s == "semi_implicit_cn") return TimeScheme::SemiImplicitCN;
        throw ConfigError("config: unknown time.scheme '" + s + "'");
    }

    LinearSolverSpec make_linear() const {
        LinearSolverSpec spec;
        std::string k = get_string("linear.solver", "direct");
        if (k == "direct" || k == "direct_banded")
            spec.kind = LinearSolverKind::Direct;
        else if (k == "cg" || k == "conjugate_gradient")
            spec.kind = LinearSolverKind::ConjugateGradient;
        else
            throw ConfigError("config: unknown linear.solver '" + k + "'");
        spec.cg_tol = get_double("linear.cg_tol", 1e-12);
        spec.cg_max_iter = get_int("linear.cg_max_iter", 2000);
        return spec;
    }

    ThinSolverConfig make_thin_solver() const {
        ThinSolverConfig cfg;
        cfg.scheme = make_scheme();
        cfg.dt = get_double("time.dt", 1e-3);
        cfg.linear = make_linear();
        return cfg;
    }

    SurfaceSolverConfig make_surface_solver() const {
        SurfaceSolverConfig cfg;
        std::string b = get_string("surface.backend", "fd");
        if (b == "fd" || b == "finite_difference")
            cfg.backend = SurfaceBackend::FiniteDifference;
        else if (b == "galerkin")
            cfg.backend = SurfaceBackend::Galerkin;
        else
            throw ConfigError("config: unknown surface.backend '" + b + "'");
        cfg.scheme = make_scheme();
        cfg.dt = get_double("time.dt", 1e-3);
        cfg.galerkin_modes = get_int("surface.modes", 16);
        cfg.weighted_basis = get_bool("surface.weighted_basis", true);
        cfg.linear_only = get_bool("surface.linear_only", false);
        cfg.linear = make_linear();
        return cfg;
    }

    double final_time() const { return get_double("time.T", 0.5); }
    double dt() const { return get_double("time.dt", 1e-3); }
    int m_theta() const { return get_int("grid.m_theta", 256); }
    int m_sigma() const { return get_int("grid.m_sigma", 32); }

    // Uniformly spaced snapshot times {0, ..., T} (count includes both ends).
    std::vector<double> snapshot_times() const {
        int n = get_int("time.snapshots", 11);
        if (n < 2) throw ConfigError("config: time.snapshots must be at least 2");
        double T = final_time();
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = T * i / (n - 1);
        return out;
    }

    std::vector<double> sweep_epsilons() const {
        auto eps = get_double_list("sweep.epsilons", {0.2, 0.1, 0.05, 0.025});
        if (eps.size() < 3)
            throw ConfigError("config: sweep.epsilons needs at least 3 values for a rate fit");
        for (double e : eps)
            if (!(e > 0)) throw ConfigError("config: sweep epsilons must be positive");
        return eps;
    }

    // The static estimate battery is cheap, so it defaults to a smaller-eps
    // ladder where the leading powers dominate the curvature corrections.
    std::vector<double> estimate_epsilons() const {
        auto eps = get_double_list("sweep.estimate_epsilons", {0.05, 0.025, 0.0125, 0.00625});
        if (eps.size() < 3)
            throw ConfigError("config: sweep.estimate_epsilons needs at least 3 values");
        for (double e : eps)
            if (!(e > 0)) throw ConfigError("config: sweep epsilons must be positive");
        return eps;
    }

  private:
    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split_list(const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                out.push_back(trim(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        out.push_back(trim(cur));
        return out;
    }

    static double to_double(const std::string& key, const std::string& s) {
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' needs a number, got '" + s + "'");
        }
    }

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "curve.family", "curve.radius", "curve.a", "curve.b", "curve.params",
            "curve.length",
            "domain.g0", "domain.g1", "domain.epsilon",
            "gl.lambda", "gl.components",
            "time.T", "time.dt", "time.scheme", "time.snapshots",
            "grid.m_theta", "grid.m_sigma",
            "init.family", "init.profile", "init.amp", "init.k_theta", "init.k_sigma",
            "init.beta", "init.c1", "init.alpha",
            "sweep.epsilons", "sweep.estimate_epsilons", "sweep.checks", "sweep.reference_factor",
            "surface.backend", "surface.modes", "surface.weighted_basis",
            "surface.linear_only",
            "linear.solver", "linear.cg_tol", "linear.cg_max_iter",
        };
        return keys;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace thinflow
