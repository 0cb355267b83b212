// geometry.hpp
//
// Closed plane curves with analytic derivatives, thickness profiles, and the
// curved band domain built from them:
//
//     Omega = { gamma(theta) + r * nu(theta) :  eps*g0 < r < eps*g1 }.
//
// Conventions (fixed throughout the library):
//   * curves are parametrized counterclockwise on theta in [0, 2*pi),
//   * nu is the OUTWARD unit normal, obtained from the unit tangent t by a
//     -90 degree rotation,
//   * the shape operator is the negative tangential derivative of nu, so its
//     eigenvalue kappa satisfies d(nu)/ds = -kappa * t.  A circle of radius R
//     has kappa = -1/R under this convention, and the offset-map Jacobian is
//         J(theta, r) = 1 - r * kappa(theta),
//     which equals the arclength stretch |d(gamma + r nu)/ds| of the offset
//     curve (exact identity in the plane, used as a test oracle).
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thinflow/common.hpp"

namespace thinflow {

// ---------------------------------------------------------------------------
// Closed-form scalar functions of theta.  Used for thickness profiles and
// initial-data components.  Families:
//   constant:  c0
//   cosine:    c0 + c1*cos(k*theta)
//   fourier:   a0 + sum_k (a_k*cos(k*theta) + b_k*sin(k*theta)),
//              params laid out as a0, a1, b1, a2, b2, ...
// ---------------------------------------------------------------------------
class ScalarFunction {
  public:
    enum class Family { Constant, Cosine, Fourier };

    static ScalarFunction constant(double c) { return ScalarFunction(Family::Constant, {c}); }

    static ScalarFunction cosine(double c0, double c1, int k) {
        if (k < 0) throw ConfigError("cosine profile: mode index must be >= 0");
        return ScalarFunction(Family::Cosine, {c0, c1, static_cast<double>(k)});
    }

    static ScalarFunction fourier(std::vector<double> params) {
        if (params.empty()) throw ConfigError("fourier function: needs at least the mean value a0");
        return ScalarFunction(Family::Fourier, std::move(params));
    }

    // Parse "constant:c", "cosine:c0,c1,k", "fourier:a0,a1,b1,...".
    static ScalarFunction parse(const std::string& spec) {
        auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw ConfigError("scalar function spec '" + spec + "': expected 'family:params'");
        std::string family = spec.substr(0, colon);
        std::vector<double> params;
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            size_t pos = 0;
            double v;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw ConfigError("scalar function spec '" + spec + "': bad number '" + tok + "'");
            }
            if (pos != tok.size())
                throw ConfigError("scalar function spec '" + spec + "': bad number '" + tok + "'");
            params.push_back(v);
        }
        if (family == "constant") {
            if (params.size() != 1) throw ConfigError("constant function: expected one parameter");
            return constant(params[0]);
        }
        if (family == "cosine") {
            if (params.size() != 3) throw ConfigError("cosine function: expected c0,c1,k");
            double kd = params[2];
            if (kd != std::floor(kd)) throw ConfigError("cosine function: k must be an integer");
            return cosine(params[0], params[1], static_cast<int>(kd));
        }
        if (family == "fourier") return fourier(params);
        throw ConfigError("scalar function spec '" + spec + "': unknown family '" + family + "'");
    }

    double value(double theta) const {
        switch (family_) {
            case Family::Constant:
                return p_[0];
            case Family::Cosine:
                return p_[0] + p_[1] * std::cos(p_[2] * theta);
            case Family::Fourier: {
                double s = p_[0];
                int k = 1;
                for (size_t i = 1; i < p_.size(); i += 2, ++k) {
                    s += p_[i] * std::cos(k * theta);
                    if (i + 1 < p_.size()) s += p_[i + 1] * std::sin(k * theta);
                }
                return s;
            }
        }
        return 0.0;
    }

    double derivative(double theta) const {
        switch (family_) {
            case Family::Constant:
                return 0.0;
            case Family::Cosine:
                return -p_[1] * p_[2] * std::sin(p_[2] * theta);
            case Family::Fourier: {
                double s = 0.0;
                int k = 1;
                for (size_t i = 1; i < p_.size(); i += 2, ++k) {
                    s += -p_[i] * k * std::sin(k * theta);
                    if (i + 1 < p_.size()) s += p_[i + 1] * k * std::cos(k * theta);
                }
                return s;
            }
        }
        return 0.0;
    }

    double max_abs(int samples = 4096) const {
        double m = 0.0;
        for (int j = 0; j < samples; ++j) m = std::max(m, std::abs(value(kTwoPi * j / samples)));
        return m;
    }

    Family family() const { return family_; }
    const std::vector<double>& params() const { return p_; }

  private:
    ScalarFunction(Family f, std::vector<double> p) : family_(f), p_(std::move(p)) {}
    Family family_;
    std::vector<double> p_;
};

using ThicknessProfile = ScalarFunction;

// ---------------------------------------------------------------------------
// Frame of the midline curve at one parameter value.
// ---------------------------------------------------------------------------
struct CurveFrame {
    Vec2 position;
    Vec2 tangent;        // unit tangent t
    Vec2 normal;         // outward unit normal nu = rotate_cw(t)
    double curvature;    // kappa with d(nu)/ds = -kappa t (circle R: -1/R)
    double metric;       // m = |gamma'(theta)| (arclength density)
    double dcurvature_ds;  // d(kappa)/ds, needed by the averaged-gradient identity
};

// ---------------------------------------------------------------------------
// Closed plane curve families with analytic derivatives up to third order.
// The third derivative feeds d(kappa)/ds; finite differences are only used
// as independent test oracles, never in the library itself.
// ---------------------------------------------------------------------------
class PlaneCurve {
  public:
    enum class Family { Circle, Ellipse, Fourier, Flat };

    static PlaneCurve circle(double radius) {
        if (!(radius > 0)) throw ConfigError("circle: radius must be positive");
        return PlaneCurve(Family::Circle, {radius}, {}, {});
    }

    static PlaneCurve ellipse(double a, double b) {
        if (!(a > 0) || !(b > 0)) throw ConfigError("ellipse: semi-axes must be positive");
        return PlaneCurve(Family::Ellipse, {a, b}, {}, {});
    }

    // Radial graph rho(theta) = a0 + sum_k (a_k cos k th + b_k sin k th),
    // gamma = rho * (cos theta, sin theta).  rho must stay positive.
    static PlaneCurve fourier(std::vector<double> radial_params) {
        PlaneCurve c(Family::Fourier, {}, ScalarFunction::fourier(std::move(radial_params)), {});
        double rho_min = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 4096; ++j) rho_min = std::min(rho_min, c.rho_->value(kTwoPi * j / 4096));
        if (!(rho_min > 0)) throw ConfigError("fourier curve: radial function must be positive");
        return c;
    }

    // Straight periodic band fixture: gamma(theta) = (length*theta/(2 pi), 0).
    // Zero curvature everywhere; the embedding is not theta-periodic (flagged
    // via periodic_embedding()), but all band fields are.
    static PlaneCurve flat_band(double length) {
        if (!(length > 0)) throw ConfigError("flat band: length must be positive");
        return PlaneCurve(Family::Flat, {length}, {}, {});
    }

    Family family() const { return family_; }
    bool periodic_embedding() const { return family_ != Family::Flat; }

    Vec2 position(double theta) const { return d0(theta); }

    // Analytic derivatives of the parametrization.
    Vec2 d0(double t) const {
        switch (family_) {
            case Family::Circle:
                return {p_[0] * std::cos(t), p_[0] * std::sin(t)};
            case Family::Ellipse:
                return {p_[0] * std::cos(t), p_[1] * std::sin(t)};
            case Family::Fourier: {
                double r = rho_->value(t);
                return {r * std::cos(t), r * std::sin(t)};
            }
            case Family::Flat:
                return {p_[0] * t / kTwoPi, 0.0};
        }
        return {};
    }

    Vec2 d1(double t) const {
        switch (family_) {
            case Family::Circle:
                return {-p_[0] * std::sin(t), p_[0] * std::cos(t)};
            case Family::Ellipse:
                return {-p_[0] * std::sin(t), p_[1] * std::cos(t)};
            case Family::Fourier: {
                double r = rho_->value(t), r1 = rho_d(t, 1);
                double c = std::cos(t), s = std::sin(t);
                return {r1 * c - r * s, r1 * s + r * c};
            }
            case Family::Flat:
                return {p_[0] / kTwoPi, 0.0};
        }
        return {};
    }

    Vec2 d2(double t) const {
        switch (family_) {
            case Family::Circle:
                return {-p_[0] * std::cos(t), -p_[0] * std::sin(t)};
            case Family::Ellipse:
                return {-p_[0] * std::cos(t), -p_[1] * std::sin(t)};
            case Family::Fourier: {
                double r = rho_->value(t), r1 = rho_d(t, 1), r2 = rho_d(t, 2);
                double c = std::cos(t), s = std::sin(t);
                return {(r2 - r) * c - 2 * r1 * s, (r2 - r) * s + 2 * r1 * c};
            }
            case Family::Flat:
                return {0.0, 0.0};
        }
        return {};
    }

    Vec2 d3(double t) const {
        switch (family_) {
            case Family::Circle:
                return {p_[0] * std::sin(t), -p_[0] * std::cos(t)};
            case Family::Ellipse:
                return {p_[0] * std::sin(t), -p_[1] * std::cos(t)};
            case Family::Fourier: {
                double r1 = rho_d(t, 1), r2 = rho_d(t, 2), r3 = rho_d(t, 3);
                double r = rho_->value(t);
                double c = std::cos(t), s = std::sin(t);
                // Third derivative of (r cos, r sin) by Leibniz expansion.
                return {(r3 - 3 * r1) * c - (3 * r2 - r) * s,
                        (r3 - 3 * r1) * s + (3 * r2 - r) * c};
            }
            case Family::Flat:
                return {0.0, 0.0};
        }
        return {};
    }

    CurveFrame frame(double theta) const {
        Vec2 g1 = d1(theta), g2 = d2(theta), g3 = d3(theta);
        double m2 = g1.norm2();
        double m = std::sqrt(m2);
        if (!(m > 0)) throw NumericalError("curve frame: degenerate parametrization (|gamma'| = 0)");
        CurveFrame f;
        f.position = d0(theta);
        f.tangent = g1 * (1.0 / m);
        f.normal = rotate_cw(f.tangent);
        // Signed curvature of the counterclockwise parametrization is
        // q/m^3 with q = x'y'' - y'x''; our convention flips the sign.
        double q = g1.x * g2.y - g1.y * g2.x;
        f.curvature = -q / (m2 * m);
        f.metric = m;
        // d(kappa)/dtheta = -(q' m - 3 q m') / m^4, then /m for d/ds.
        double qp = g1.x * g3.y - g1.y * g3.x;  // x'y''' - y'x''' (middle terms cancel)
        double mp = g1.dot(g2) / m;
        double dkappa_dtheta = -(qp * m - 3.0 * q * mp) / (m2 * m2);
        f.dcurvature_ds = dkappa_dtheta / m;
        return f;
    }

  private:
    PlaneCurve(Family f, std::vector<double> p, std::optional<ScalarFunction> rho,
               std::optional<int>)
        : family_(f), p_(std::move(p)), rho_(std::move(rho)) {}

    double rho_d(double t, int order) const {
        // Derivatives of the radial Fourier series, order 1..3.
        const auto& p = rho_->params();
        double s = 0.0;
        int k = 1;
        for (size_t i = 1; i < p.size(); i += 2, ++k) {
            double a = p[i];
            double b = (i + 1 < p.size()) ? p[i + 1] : 0.0;
            double kk = k;
            switch (order) {
                case 1:
                    s += -a * kk * std::sin(k * t) + b * kk * std::cos(k * t);
                    break;
                case 2:
                    s += -a * kk * kk * std::cos(k * t) - b * kk * kk * std::sin(k * t);
                    break;
                case 3:
                    s += a * kk * kk * kk * std::sin(k * t) - b * kk * kk * kk * std::cos(k * t);
                    break;
            }
        }
        return s;
    }

    Family family_;
    std::vector<double> p_;
    std::optional<ScalarFunction> rho_;
};

// ---------------------------------------------------------------------------
// The curved band domain and its validity analysis.
// ---------------------------------------------------------------------------

// Metric data of the band coordinates (theta, sigma) at one point, where
// r = eps*(g0 + sigma*(g1-g0)) and x = gamma(theta) + r*nu(theta).
struct FermiData {
    Vec2 point;
    double r;
    double metric;    // m(theta)
    double jacobian;  // J(theta, r) = 1 - r*kappa
    double dR_dtheta;  // eps*(g0' + sigma*(g1-g0)')
    double dR_dsigma;  // eps*(g1-g0)
};

struct ValidationReport {
    bool ok = false;
    double delta = 0.0;     // admissible half-width of the tubular neighborhood
    double min_g = 0.0;     // min of g1-g0
    double min_J = 0.0;     // min of J over the band
    double max_J = 0.0;
    double sup_abs_curvature = 0.0;
    std::vector<std::string> messages;  // failure reasons, empty when ok

    std::string summary() const {
        std::string s = ok ? "admissible" : "not admissible";
        s += " (delta=" + format_double(delta) + ", min_g=" + format_double(min_g) +
             ", J in [" + format_double(min_J) + ", " + format_double(max_J) +
             "], sup|curvature|=" + format_double(sup_abs_curvature) + ")";
        for (const auto& msg : messages) s += "; " + msg;
        return s;
    }
};

class ThinDomain {
  public:
    ThinDomain(PlaneCurve curve, ThicknessProfile g0, ThicknessProfile g1, double epsilon)
        : curve_(std::move(curve)), g0_(std::move(g0)), g1_(std::move(g1)), epsilon_(epsilon) {
        if (!(epsilon > 0)) throw ConfigError("thin domain: epsilon must be positive");
        compute_delta();
    }

    const PlaneCurve& curve() const { return curve_; }
    const ThicknessProfile& g0() const { return g0_; }
    const ThicknessProfile& g1() const { return g1_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }

    double g(double theta) const { return g1_.value(theta) - g0_.value(theta); }
    double g_derivative(double theta) const {
        return g1_.derivative(theta) - g0_.derivative(theta);
    }

    // Normal offset at band coordinate sigma in [0,1].
    double offset(double theta, double sigma) const {
        return epsilon_ * (g0_.value(theta) + sigma * g(theta));
    }

    double jacobian(double theta, double r) const { return 1.0 - r * curve_.frame(theta).curvature; }

    FermiData fermi_map(double theta, double sigma) const {
        CurveFrame f = curve_.frame(theta);
        FermiData d;
        d.r = offset(theta, sigma);
        d.point = f.position + d.r * f.normal;
        d.metric = f.metric;
        d.jacobian = 1.0 - d.r * f.curvature;
        d.dR_dtheta = epsilon_ * (g0_.derivative(theta) + sigma * g_derivative(theta));
        d.dR_dsigma = epsilon_ * g(theta);
        return d;
    }

    // Validity: positive thickness, band inside the tubular neighborhood
    // (eps * sup|g_i| < delta), and positive offset Jacobian on the band.
    // J is affine in r, so its extremes sit on the two band faces.
    ValidationReport validate(int samples = 2048) const {
        ValidationReport rep;
        rep.delta = delta_;
        rep.sup_abs_curvature = sup_abs_kappa_;
        double min_g = std::numeric_limits<double>::infinity();
        double sup_g0 = 0.0, sup_g1 = 0.0;
        double min_J = std::numeric_limits<double>::infinity();
        double max_J = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < samples; ++j) {
            double th = kTwoPi * j / samples;
            double v0 = g0_.value(th), v1 = g1_.value(th);
            min_g = std::min(min_g, v1 - v0);
            sup_g0 = std::max(sup_g0, std::abs(v0));
            sup_g1 = std::max(sup_g1, std::abs(v1));
            double kap = curve_.frame(th).curvature;
            for (double r : {epsilon_ * v0, epsilon_ * v1}) {
                double J = 1.0 - r * kap;
                min_J = std::min(min_J, J);
                max_J = std::max(max_J, J);
            }
        }
        rep.min_g = min_g;
        rep.min_J = min_J;
        rep.max_J = max_J;
        if (!(min_g > 0))
            rep.messages.push_back("thickness g1-g0 is not strictly positive (min " +
                                   format_double(min_g) + ")");
        double reach_demand = epsilon_ * std::max(sup_g0, sup_g1);
        if (!(reach_demand < delta_))
            rep.messages.push_back("band leaves the tubular neighborhood: eps*sup|g| = " +
                                   format_double(reach_demand) + " >= delta = " +
                                   format_double(delta_));
        if (!(min_J > 0))
            rep.messages.push_back("offset map degenerates on the band: min J = " +
                                   format_double(min_J) + " <= 0 (offset curves self-intersect)");
        rep.ok = rep.messages.empty();
        return rep;
    }

  private:
    // delta = min( 0.9 / sup|kappa| , sampled injectivity-radius estimate ).
    // The injectivity estimate uses the tangent-circle radius through point
    // pairs: rho_ij = |q-p|^2 / (2 |(q-p).nu_p|), exact for circles and
    // sensitive to bottlenecks of non-convex curves.
    void compute_delta() {
        const int M = 1024;
        std::vector<Vec2> pos(M), nor(M);
        sup_abs_kappa_ = 0.0;
        for (int j = 0; j < M; ++j) {
            CurveFrame f = curve_.frame(kTwoPi * j / M);
            pos[j] = f.position;
            nor[j] = f.normal;
            sup_abs_kappa_ = std::max(sup_abs_kappa_, std::abs(f.curvature));
        }
        double delta_curv = sup_abs_kappa_ > 0 ? 0.9 / sup_abs_kappa_
                                               : std::numeric_limits<double>::infinity();
        double delta_inj = std::numeric_limits<double>::infinity();
        if (curve_.periodic_embedding()) {
            for (int i = 0; i < M; ++i) {
                for (int j = i + 1; j < M; ++j) {
                    Vec2 d = pos[j] - pos[i];
                    double den = std::abs(d.dot(nor[i]));
                    double n2 = d.norm2();
                    if (den > 1e-14 * std::sqrt(n2) && n2 > 0)
                        delta_inj = std::min(delta_inj, n2 / (2.0 * den));
                }
            }
        }
        delta_ = std::min(delta_curv, delta_inj);
    }

    PlaneCurve curve_;
    ThicknessProfile g0_, g1_;
    double epsilon_;
    double delta_ = 0.0;
    double sup_abs_kappa_ = 0.0;
};

}  // namespace thinflow
