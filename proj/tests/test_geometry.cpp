// Geometry layer: frames against closed forms and high-order finite
// difference oracles, band validity analysis, and spec parsing.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "thinflow/geometry.hpp"

using namespace thinflow;
using Catch::Approx;

namespace {

// Fourth-order central difference of a curve-valued function of theta.
template <class F>
Vec2 fd4(const F& f, double t, double h) {
    Vec2 a = f(t - 2 * h), b = f(t - h), c = f(t + h), d = f(t + 2 * h);
    return (a - 8.0 * b + 8.0 * c - d) * (1.0 / (12.0 * h));
}

template <class F>
double fd4_scalar(const F& f, double t, double h) {
    return (f(t - 2 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2 * h)) / (12.0 * h);
}

const double kFdStep = kTwoPi / 8192;

}  // namespace

TEST_CASE("circle frame matches closed forms exactly") {
    PlaneCurve c = PlaneCurve::circle(2.0);
    CurveFrame f = c.frame(0.0);
    REQUIRE(f.position.x == Approx(2.0).margin(1e-15));
    REQUIRE(f.position.y == Approx(0.0).margin(1e-15));
    REQUIRE(f.tangent.x == Approx(0.0).margin(1e-15));
    REQUIRE(f.tangent.y == Approx(1.0).margin(1e-15));
    REQUIRE(f.normal.x == Approx(1.0).margin(1e-15));
    REQUIRE(f.normal.y == Approx(0.0).margin(1e-15));
    REQUIRE(f.curvature == Approx(-0.5).margin(1e-15));
    REQUIRE(f.metric == Approx(2.0).margin(1e-15));
    REQUIRE(f.dcurvature_ds == Approx(0.0).margin(1e-15));

    // The outward normal points along the position vector everywhere.
    for (double th : {0.3, 1.7, 3.9, 5.5}) {
        CurveFrame g = c.frame(th);
        REQUIRE(g.normal.x == Approx(g.position.x / 2.0).margin(1e-14));
        REQUIRE(g.normal.y == Approx(g.position.y / 2.0).margin(1e-14));
        REQUIRE(g.curvature == Approx(-0.5).margin(1e-14));
    }
}

TEST_CASE("ellipse curvature matches the closed form") {
    const double a = 1.5, b = 1.0;
    PlaneCurve c = PlaneCurve::ellipse(a, b);
    for (int i = 0; i < 32; ++i) {
        double th = kTwoPi * i / 32;
        double m = std::sqrt(a * a * std::sin(th) * std::sin(th) +
                             b * b * std::cos(th) * std::cos(th));
        CurveFrame f = c.frame(th);
        REQUIRE(f.metric == Approx(m).margin(1e-14));
        REQUIRE(f.curvature == Approx(-a * b / (m * m * m)).margin(1e-13));
    }
}

TEST_CASE("analytic parametrization derivatives agree with finite differences") {
    auto curves = {PlaneCurve::ellipse(1.5, 1.0),
                   PlaneCurve::fourier({1.0, 0.0, 0.0, 0.1, 0.05, 0.02, 0.0})};
    for (const PlaneCurve& c : curves) {
        for (int i = 0; i < 48; ++i) {
            double th = kTwoPi * i / 48 + 0.013;
            Vec2 e1 = fd4([&](double t) { return c.d0(t); }, th, kFdStep) - c.d1(th);
            Vec2 e2 = fd4([&](double t) { return c.d1(t); }, th, kFdStep) - c.d2(th);
            Vec2 e3 = fd4([&](double t) { return c.d2(t); }, th, kFdStep) - c.d3(th);
            REQUIRE(e1.norm() < 1e-9);
            REQUIRE(e2.norm() < 1e-8);
            REQUIRE(e3.norm() < 1e-7);
        }
    }
}

TEST_CASE("normal turns against the tangent at rate curvature") {
    // d(nu)/ds + kappa * t = 0 is the sign convention the whole library
    // hangs on; verify it with a high-order difference of nu.
    auto curves = {PlaneCurve::circle(1.0), PlaneCurve::ellipse(1.5, 1.0),
                   PlaneCurve::fourier({1.0, 0.0, 0.0, 0.1, 0.05})};
    for (const PlaneCurve& c : curves) {
        for (int i = 0; i < 48; ++i) {
            double th = kTwoPi * i / 48 + 0.007;
            CurveFrame f = c.frame(th);
            Vec2 dnu_dth = fd4([&](double t) { return c.frame(t).normal; }, th, kFdStep);
            Vec2 resid = dnu_dth * (1.0 / f.metric) + f.curvature * f.tangent;
            REQUIRE(resid.norm() < 1e-8);
        }
    }
}

TEST_CASE("curvature derivative along arclength agrees with finite differences") {
    PlaneCurve c = PlaneCurve::fourier({1.0, 0.0, 0.0, 0.1, 0.05});
    for (int i = 0; i < 32; ++i) {
        double th = kTwoPi * i / 32 + 0.041;
        CurveFrame f = c.frame(th);
        double dk_dth = fd4_scalar([&](double t) { return c.frame(t).curvature; }, th, kFdStep);
        REQUIRE(f.dcurvature_ds == Approx(dk_dth / f.metric).margin(1e-6));
    }
}

TEST_CASE("offset jacobian equals the offset-curve stretch") {
    // |d(gamma + r nu)/d theta| / m = 1 - r kappa, exactly in the plane.
    auto curves = {PlaneCurve::ellipse(1.5, 1.0), PlaneCurve::fourier({1.0, 0.0, 0.0, 0.1, 0.05})};
    for (const PlaneCurve& c : curves) {
        for (double r : {-0.15, 0.0, 0.2}) {
            for (int i = 0; i < 32; ++i) {
                double th = kTwoPi * i / 32 + 0.019;
                CurveFrame f = c.frame(th);
                Vec2 doff = fd4(
                    [&](double t) {
                        CurveFrame g = c.frame(t);
                        return g.position + r * g.normal;
                    },
                    th, kFdStep);
                REQUIRE(doff.norm() / f.metric == Approx(1.0 - r * f.curvature).margin(1e-8));
            }
        }
    }
    // On a circle the identity is exact arithmetic: J = (R + r) / R.
    PlaneCurve circ = PlaneCurve::circle(2.0);
    ThinDomain dom(circ, ScalarFunction::constant(0.0), ScalarFunction::constant(1.0), 0.1);
    REQUIRE(dom.jacobian(0.7, 0.3) == Approx((2.0 + 0.3) / 2.0).margin(1e-15));
}

TEST_CASE("frames are 2 pi periodic") {
    PlaneCurve c = PlaneCurve::fourier({1.0, 0.1, 0.0, 0.0, 0.05});
    for (double th : {0.0, 0.9, 2.7, 4.4}) {
        CurveFrame f = c.frame(th), g = c.frame(th + kTwoPi);
        REQUIRE((f.position - g.position).norm() < 1e-12);
        REQUIRE((f.tangent - g.tangent).norm() < 1e-12);
        REQUIRE(f.curvature == Approx(g.curvature).margin(1e-12));
    }
}

TEST_CASE("fourier curve requires a positive radial function") {
    REQUIRE_THROWS_AS(PlaneCurve::fourier({0.1, 0.0, 0.0, 0.5}), ConfigError);
    REQUIRE_NOTHROW(PlaneCurve::fourier({1.0, 0.0, 0.0, 0.5}));
}

TEST_CASE("flat band fixture") {
    PlaneCurve c = PlaneCurve::flat_band(kTwoPi);
    REQUIRE_FALSE(c.periodic_embedding());
    CurveFrame f = c.frame(1.1);
    REQUIRE(f.tangent.x == Approx(1.0).margin(1e-15));
    REQUIRE(f.tangent.y == Approx(0.0).margin(1e-15));
    REQUIRE(f.normal.x == Approx(0.0).margin(1e-15));
    REQUIRE(f.normal.y == Approx(-1.0).margin(1e-15));
    REQUIRE(f.curvature == 0.0);
    REQUIRE(f.metric == Approx(1.0).margin(1e-15));

    // Flat geometry has no curvature or reach constraint; wide bands with
    // offset faces are admissible as long as the thickness is positive.
    ThinDomain dom(c, ScalarFunction::constant(-3.0), ScalarFunction::constant(0.0), 0.5);
    REQUIRE(std::isinf(dom.delta()));
    ValidationReport rep = dom.validate();
    REQUIRE(rep.ok);
    REQUIRE(rep.min_J == Approx(1.0).margin(1e-15));
    REQUIRE(rep.max_J == Approx(1.0).margin(1e-15));
}

TEST_CASE("admissible half-width: curvature bound and circle exactness") {
    REQUIRE(ThinDomain(PlaneCurve::circle(1.0), ScalarFunction::constant(0.0),
                       ScalarFunction::constant(1.0), 0.1)
                .delta() == Approx(0.9).margin(1e-12));
    REQUIRE(ThinDomain(PlaneCurve::circle(2.0), ScalarFunction::constant(0.0),
                       ScalarFunction::constant(1.0), 0.1)
                .delta() == Approx(1.8).margin(1e-12));
    // Non-convex curve: half-width stays positive and within the curvature cap.
    ThinDomain wavy(PlaneCurve::fourier({1.0, 0.0, 0.0, 0.2, 0.0}), ScalarFunction::constant(0.0),
                    ScalarFunction::constant(1.0), 0.05);
    REQUIRE(wavy.delta() > 0.0);
    ValidationReport rep = wavy.validate();
    REQUIRE(rep.sup_abs_curvature > 0.0);
    REQUIRE(wavy.delta() <= 0.9 / rep.sup_abs_curvature + 1e-12);
}

TEST_CASE("validation flags inadmissible bands with reasons") {
    SECTION("band reaching past the tubular neighborhood, offset map folding") {
        ThinDomain dom(PlaneCurve::circle(1.0), ScalarFunction::constant(-3.0),
                       ScalarFunction::constant(0.0), 0.5);
        ValidationReport rep = dom.validate();
        REQUIRE_FALSE(rep.ok);
        REQUIRE(rep.messages.size() == 2);  // reach violation and J <= 0
        REQUIRE(rep.min_J < 0.0);
        REQUIRE(rep.summary().find("not admissible") != std::string::npos);
    }
    SECTION("non-positive thickness") {
        ThinDomain dom(PlaneCurve::circle(1.0), ScalarFunction::constant(0.2),
                       ScalarFunction::constant(0.1), 0.01);
        ValidationReport rep = dom.validate();
        REQUIRE_FALSE(rep.ok);
        REQUIRE(rep.messages.size() == 1);
        REQUIRE(rep.min_g == Approx(-0.1).margin(1e-15));
    }
    SECTION("healthy band") {
        ThinDomain dom(PlaneCurve::circle(1.0), ScalarFunction::constant(0.0),
                       ScalarFunction::parse("cosine:1,0.3,1"), 0.1);
        ValidationReport rep = dom.validate();
        REQUIRE(rep.ok);
        REQUIRE(rep.messages.empty());
        REQUIRE(rep.min_g == Approx(0.7).margin(1e-12));
    }
}

TEST_CASE("fermi map composes position, offset, and thickness data") {
    ThinDomain dom(PlaneCurve::ellipse(1.5, 1.0), ScalarFunction::constant(-0.2),
                   ScalarFunction::parse("cosine:1,0.3,1"), 0.1);
    for (double th : {0.0, 1.1, 3.8}) {
        for (double sig : {0.0, 0.4, 1.0}) {
            FermiData d = dom.fermi_map(th, sig);
            CurveFrame f = dom.curve().frame(th);
            REQUIRE(d.r == Approx(dom.offset(th, sig)).margin(1e-15));
            REQUIRE((d.point - (f.position + d.r * f.normal)).norm() < 1e-14);
            REQUIRE(d.jacobian == Approx(1.0 - d.r * f.curvature).margin(1e-14));
            REQUIRE(d.dR_dsigma == Approx(0.1 * dom.g(th)).margin(1e-15));
        }
    }
}

TEST_CASE("scalar function parsing and evaluation") {
    SECTION("families evaluate to their closed forms") {
        REQUIRE(ScalarFunction::parse("constant:2.5").value(1.0) == Approx(2.5));
        ScalarFunction cos2 = ScalarFunction::parse("cosine:1,0.3,2");
        REQUIRE(cos2.value(0.7) == Approx(1.0 + 0.3 * std::cos(1.4)).margin(1e-15));
        ScalarFunction four = ScalarFunction::parse("fourier:0.3,0.5,0,0,0.2");
        double th = 1.3;
        REQUIRE(four.value(th) ==
                Approx(0.3 + 0.5 * std::cos(th) + 0.2 * std::sin(2 * th)).margin(1e-15));
    }
    SECTION("derivatives agree with finite differences") {
        for (const char* spec : {"constant:1.0", "cosine:0.5,0.2,3", "fourier:0.1,0.4,0.3,0,0.2"}) {
            ScalarFunction f = ScalarFunction::parse(spec);
            for (int i = 0; i < 16; ++i) {
                double th = kTwoPi * i / 16 + 0.05;
                double fd = fd4_scalar([&](double t) { return f.value(t); }, th, kFdStep);
                REQUIRE(f.derivative(th) == Approx(fd).margin(1e-9));
            }
        }
    }
    SECTION("malformed specs are rejected") {
        REQUIRE_THROWS_AS(ScalarFunction::parse("nope:1"), ConfigError);
        REQUIRE_THROWS_AS(ScalarFunction::parse("cosine:1,2"), ConfigError);
        REQUIRE_THROWS_AS(ScalarFunction::parse("cosine:1,2,1.5"), ConfigError);
        REQUIRE_THROWS_AS(ScalarFunction::parse("constant:abc"), ConfigError);
        REQUIRE_THROWS_AS(ScalarFunction::parse("fourier:"), ConfigError);
        REQUIRE_THROWS_AS(ScalarFunction::parse("1.5"), ConfigError);
    }
}

TEST_CASE("curve and domain constructor guards") {
    REQUIRE_THROWS_AS(PlaneCurve::circle(0.0), ConfigError);
    REQUIRE_THROWS_AS(PlaneCurve::ellipse(1.0, -1.0), ConfigError);
    REQUIRE_THROWS_AS(PlaneCurve::flat_band(0.0), ConfigError);
    REQUIRE_THROWS_AS(ThinDomain(PlaneCurve::circle(1.0), ScalarFunction::constant(0.0),
                                 ScalarFunction::constant(1.0), 0.0),
                      ConfigError);
}
