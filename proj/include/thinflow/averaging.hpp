// averaging.hpp
//
// The fiber average connecting band fields to curve fields, its constant
// extension back to the band, and the defect quantities that measure how
// faithfully the pair (average, extend) transports norms, pairings, energy
// forms, and the cubic nonlinearity between the two geometries.
//
// The average of a band field u along the normal fiber over theta_j is
//     (M u)(theta_j) = (1/(eps g)) * integral_{eps g0}^{eps g1} u J dr
//                    = integral_0^1 u(theta_j, sigma) J(theta_j, sigma) dsigma,
// evaluated with the same trapezoid sigma-rule as the node quadrature.  With
// that shared rule the pairing identity
//     (u, extend(eta))_{L2(band)} = eps * (g * M u, eta)_{L2(curve)}
// holds EXACTLY at quadrature level (both sides expand to the identical
// finite sum), so its defect is pure roundoff; tests pin it at 1e-12.
#pragma once

#include <array>
#include <cmath>

#include "thinflow/operators.hpp"

namespace thinflow {

inline SurfaceField average(const ThinGrid& grid, const ThinField& u) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    SurfaceField out(u.components, M);
    for (int c = 0; c < u.components; ++c)
        for (int j = 0; j < M; ++j) {
            double s = 0.0;
            for (int k = 0; k < K; ++k)
                s += u.at(c, j, k) * grid.jacobian(j, k) * grid.sigma_weight(k);
            out.at(c, j) = s;
        }
    return out;
}

// Constant extension along fibers: (extend v)(theta, sigma) = v(theta).
inline ThinField extend(const ThinGrid& grid, const SurfaceField& v) {
    ThinField out(v.components, grid.m_theta(), grid.m_sigma());
    for (int c = 0; c < v.components; ++c)
        for (int j = 0; j < grid.m_theta(); ++j)
            for (int k = 0; k < grid.m_sigma(); ++k) out.at(c, j, k) = v.at(c, j);
    return out;
}

// eps * (g a, b)_{L2(curve)} -- the thickness-weighted curve pairing that
// partners the band pairing under the average.
inline double weighted_surface_pairing(const ThinGrid& grid, const SurfaceField& a,
                                       const SurfaceField& b) {
    double s = 0.0;
    for (int j = 0; j < grid.m_theta(); ++j) {
        double q = 0.0;
        for (int c = 0; c < a.components; ++c) q += a.at(c, j) * b.at(c, j);
        s += q * grid.g(j) * grid.base().weight(j);
    }
    return grid.epsilon() * s;
}

struct PairingDefect {
    double band_side;     // (u, extend(eta))_{L2(band)}
    double curve_side;    // eps (g Mu, eta)_{L2(curve)}
    double defect;        // |band - curve|
    double relative;      // defect / (|band| + |curve| + tiny)
};

inline PairingDefect pairing_defect(const ThinGrid& grid, const ThinField& u,
                                    const SurfaceField& eta) {
    PairingDefect d;
    d.band_side = inner_thin(grid, u, extend(grid, eta));
    d.curve_side = weighted_surface_pairing(grid, average(grid, u), eta);
    d.defect = std::abs(d.band_side - d.curve_side);
    d.relative = d.defect / (std::abs(d.band_side) + std::abs(d.curve_side) + 1e-300);
    return d;
}

// ---------------------------------------------------------------------------
// Coefficient fields of the exact tangential-gradient identity
//     grad_curve (M u) = M(B grad u) + M((du/dnu + u f_J) Psi_band)
//                        + M(u Psi_J),
// where on a plane curve every vector term is tangential:
//     B          = J t (x) t                       (projection minus r*shape),
//     Psi_band   = (1/g) [ (r - eps g0) grad g1 + (eps g1 - r) grad g0 ],
//     f_J        = (d/dr J)/J = -kappa/J,
//     Psi_J      = (grad_curve J)/J = -(r dkappa/ds / J) t.
// Both Psi fields are O(eps) on the band; measured_constants() reports the
// attained sup|Psi|/eps for logging.
// ---------------------------------------------------------------------------
class AverageGradientTerms {
  public:
    explicit AverageGradientTerms(const ThinGrid& grid) : grid_(&grid) {
        const int M = grid.m_theta(), K = grid.m_sigma();
        psi_band_.assign(grid.nodes(), 0.0);
        psi_jac_.assign(grid.nodes(), 0.0);
        f_jac_.assign(grid.nodes(), 0.0);
        for (int j = 0; j < M; ++j) {
            const CurveFrame& f = grid.base().frame(j);
            const double m = f.metric;
            for (int k = 0; k < K; ++k) {
                size_t n = grid.node(j, k);
                double r = grid.offset(j, k);
                double J = grid.jacobian(j, k);
                double eps = grid.epsilon();
                psi_band_[n] = ((r - eps * grid.g0(j)) * grid.dg1(j) +
                                (eps * grid.g1(j) - r) * grid.dg0(j)) /
                               (grid.g(j) * m);
                f_jac_[n] = -f.curvature / J;
                psi_jac_[n] = -r * f.dcurvature_ds / J;
            }
        }
    }

    // Tangential coefficients (multiply by t(theta_j) for the vector).
    double psi_band(int j, int k) const { return psi_band_[grid_->node(j, k)]; }
    double psi_jac(int j, int k) const { return psi_jac_[grid_->node(j, k)]; }
    double f_jac(int j, int k) const { return f_jac_[grid_->node(j, k)]; }

    // Full 2x2 matrix B = J t(x)t at a node, row-major.
    std::array<double, 4> b_matrix(int j, int k) const {
        const Vec2 t = grid_->base().frame(j).tangent;
        double J = grid_->jacobian(j, k);
        return {J * t.x * t.x, J * t.x * t.y, J * t.y * t.x, J * t.y * t.y};
    }

    struct MeasuredConstants {
        double sup_psi_band_over_eps;
        double sup_psi_jac_over_eps;
    };

    MeasuredConstants measured_constants() const {
        double a = 0.0, b = 0.0;
        for (size_t n = 0; n < psi_band_.size(); ++n) {
            a = std::max(a, std::abs(psi_band_[n]));
            b = std::max(b, std::abs(psi_jac_[n]));
        }
        return {a / grid_->epsilon(), b / grid_->epsilon()};
    }

  private:
    const ThinGrid* grid_;
    std::vector<double> psi_band_, psi_jac_, f_jac_;
};

// Right-hand side of the tangential-gradient identity, as the tangential
// coefficient per curve node and component.  Matches the centered-difference
// gradient of (M u) to discretization order on smooth fields.
inline SurfaceField average_gradient_explicit(const ThinGrid& grid, const ThinField& u) {
    AverageGradientTerms terms(grid);
    ThinGradient gu = thin_gradient(grid, u);
    const int M = grid.m_theta(), K = grid.m_sigma();
    SurfaceField out(u.components, M);
    for (int c = 0; c < u.components; ++c)
        for (int j = 0; j < M; ++j) {
            double s = 0.0;
            for (int k = 0; k < K; ++k) {
                double J = grid.jacobian(j, k);
                double integrand = J * gu.tan.at(c, j, k)  // (B grad u) . t
                                   + (gu.nor.at(c, j, k) + u.at(c, j, k) * terms.f_jac(j, k)) *
                                         terms.psi_band(j, k)
                                   + u.at(c, j, k) * terms.psi_jac(j, k);
                s += integrand * J * grid.sigma_weight(k);
            }
            out.at(c, j) = s;
        }
    return out;
}

// || u - extend(M u) ||_{L2(band)}: how far a band field sits from the
// constant extension of its own fiber average.
inline double normal_deviation(const ThinGrid& grid, const ThinField& u) {
    SurfaceField mu = average(grid, u);
    double s = 0.0;
    for (int c = 0; c < u.components; ++c)
        for (int j = 0; j < grid.m_theta(); ++j)
            for (int k = 0; k < grid.m_sigma(); ++k) {
                double d = u.at(c, j, k) - mu.at(c, j);
                s += d * d * grid.weight(j, k);
            }
    return std::sqrt(s);
}

// || M(|u|^2) - |M u|^2 ||_{L2(curve)}: the fiber-variance defect that
// controls how the average passes through the quadratic term.
inline double average_square_defect(const ThinGrid& grid, const ThinField& u) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    SurfaceField mu = average(grid, u);
    double s = 0.0;
    for (int j = 0; j < M; ++j) {
        double m_sq = 0.0;  // M(|u|^2)
        for (int k = 0; k < K; ++k) {
            double q = 0.0;
            for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * u.at(c, j, k);
            m_sq += q * grid.jacobian(j, k) * grid.sigma_weight(k);
        }
        double sq_m = 0.0;  // |M u|^2
        for (int c = 0; c < u.components; ++c) sq_m += mu.at(c, j) * mu.at(c, j);
        double d = m_sq - sq_m;
        s += d * d * grid.base().weight(j);
    }
    return std::sqrt(s);
}

// | (|u|^2 u, extend(zeta))_{band} - eps (g |Mu|^2 Mu, zeta)_{curve} |:
// defect of transporting the cubic term through the average.
inline double cubic_pairing_defect(const ThinGrid& grid, const ThinField& u,
                                   const SurfaceField& zeta) {
    ThinField cu(u.components, u.m_theta, u.m_sigma);
    for (int j = 0; j < grid.m_theta(); ++j)
        for (int k = 0; k < grid.m_sigma(); ++k) {
            double q = 0.0;
            for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * u.at(c, j, k);
            for (int c = 0; c < u.components; ++c) cu.at(c, j, k) = q * u.at(c, j, k);
        }
    double band_side = inner_thin(grid, cu, extend(grid, zeta));

    SurfaceField mu = average(grid, u);
    SurfaceField cmu(mu.components, mu.m_theta);
    for (int j = 0; j < grid.m_theta(); ++j) {
        double q = 0.0;
        for (int c = 0; c < mu.components; ++c) q += mu.at(c, j) * mu.at(c, j);
        for (int c = 0; c < mu.components; ++c) cmu.at(c, j) = q * mu.at(c, j);
    }
    double curve_side = weighted_surface_pairing(grid, cmu, zeta);
    return std::abs(band_side - curve_side);
}

// | (grad u, grad extend(eta))_{band} - eps (g grad M u, grad eta)_{curve} |:
// defect between the band energy form against an extended test field and the
// thickness-weighted curve energy form against the averaged field.
inline double dirichlet_form_defect(const ThinGrid& grid, const ThinField& u,
                                    const SurfaceField& eta) {
    double band_side = dirichlet_form_thin(grid, u, extend(grid, eta));
    SurfaceField mu = average(grid, u);
    std::vector<double> gw(grid.m_theta());
    for (int j = 0; j < grid.m_theta(); ++j) gw[j] = grid.g(j);
    double curve_side =
        grid.epsilon() * dirichlet_form_surface(grid.base(), mu, eta, gw);
    return std::abs(band_side - curve_side);
}

}  // namespace thinflow
