// operators.hpp
//
// Discrete differential operators, norms, and Dirichlet (energy) forms on the
// band and on the midline curve.
//
// Gradients in band coordinates.  With r = R(theta,sigma) = eps*(g0+sigma*g)
// the physical gradient of a field u(theta,sigma) splits in the orthonormal
// frame (t, nu) as
//     grad u = a t + b nu,
//     a = (u_theta + s * u_sigma) / (m J),   s = -(g0' + sigma g') / g,
//     b = u_sigma / (eps g),
// where s is d(sigma)/d(theta) at fixed r.  The diagnostic operator
// thin_gradient evaluates (a, b) per node with centered differences in theta
// (periodic) and centered/one-sided second-order differences in sigma.
//
// Energy forms are assembled per CELL from one-sided edge differences with
// corner quadrature (the bilinear-element form with nodal quadrature).  This
// keeps the form symmetric positive semidefinite with kernel EXACTLY the
// constants: node-centered centered differences would admit a spurious
// checkerboard null mode on an even periodic grid.  The lumped mass induced
// by the corner quadrature coincides with the trapezoid node weights stored
// in the grids.
#pragma once

#include <algorithm>
#include <cmath>

#include "thinflow/grid.hpp"

namespace thinflow {

enum class NormKind { L2, L4, Sup, H1Seminorm };

// ---------------------------------------------------------------------------
// Surface operators
// ---------------------------------------------------------------------------

// Arclength derivative (1/m) d/dtheta per component, centered differences.
// The tangential gradient of a scalar on the curve is this value times t.
inline SurfaceField surface_gradient(const SurfaceGrid& grid, const SurfaceField& v) {
    const int M = grid.m_theta();
    SurfaceField out(v.components, M);
    const double inv2dt = 1.0 / (2.0 * grid.dtheta());
    for (int c = 0; c < v.components; ++c) {
        const double* src = v.component(c);
        double* dst = out.component(c);
        for (int j = 0; j < M; ++j) {
            int jp = (j + 1) % M, jm = (j + M - 1) % M;
            dst[j] = (src[jp] - src[jm]) * inv2dt / grid.metric(j);
        }
    }
    return out;
}

inline double norm_surface(const SurfaceGrid& grid, const SurfaceField& v, NormKind kind) {
    const int M = grid.m_theta();
    switch (kind) {
        case NormKind::L2: {
            double s = 0.0;
            for (int j = 0; j < M; ++j) {
                double q = 0.0;
                for (int c = 0; c < v.components; ++c) q += v.at(c, j) * v.at(c, j);
                s += q * grid.weight(j);
            }
            return std::sqrt(s);
        }
        case NormKind::L4: {
            double s = 0.0;
            for (int j = 0; j < M; ++j) {
                double q = 0.0;
                for (int c = 0; c < v.components; ++c) q += v.at(c, j) * v.at(c, j);
                s += q * q * grid.weight(j);
            }
            return std::pow(s, 0.25);
        }
        case NormKind::Sup: {
            double s = 0.0;
            for (int j = 0; j < M; ++j) {
                double q = 0.0;
                for (int c = 0; c < v.components; ++c) q += v.at(c, j) * v.at(c, j);
                s = std::max(s, q);
            }
            return std::sqrt(s);
        }
        case NormKind::H1Seminorm: {
            SurfaceField dv = surface_gradient(grid, v);
            return norm_surface(grid, dv, NormKind::L2);
        }
    }
    return 0.0;
}

// L2 norm against an extra per-node weight (e.g. the thickness g for the
// weighted energy of the limit problem).
inline double weighted_l2_surface(const SurfaceGrid& grid, const SurfaceField& v,
                                  const std::vector<double>& weight) {
    double s = 0.0;
    for (int j = 0; j < grid.m_theta(); ++j) {
        double q = 0.0;
        for (int c = 0; c < v.components; ++c) q += v.at(c, j) * v.at(c, j);
        s += q * weight[j] * grid.weight(j);
    }
    return std::sqrt(s);
}

inline double weighted_l4_surface(const SurfaceGrid& grid, const SurfaceField& v,
                                  const std::vector<double>& weight) {
    double s = 0.0;
    for (int j = 0; j < grid.m_theta(); ++j) {
        double q = 0.0;
        for (int c = 0; c < v.components; ++c) q += v.at(c, j) * v.at(c, j);
        s += q * q * weight[j] * grid.weight(j);
    }
    return std::pow(s, 0.25);
}

// Weighted Dirichlet form on the curve:
//     B(v, z) = integral  w(theta) * grad v . grad z  dH
//             = integral (w/m) v_theta z_theta dtheta,
// assembled per theta-cell with the corner-averaged coefficient.  Symmetric
// PSD, kernel exactly the constants.
inline double dirichlet_form_surface(const SurfaceGrid& grid, const SurfaceField& v,
                                     const SurfaceField& z, const std::vector<double>& weight) {
    const int M = grid.m_theta();
    const double dt = grid.dtheta();
    double total = 0.0;
    for (int c = 0; c < v.components; ++c) {
        const double* pv = v.component(c);
        const double* pz = z.component(c);
        double s = 0.0;
        for (int j = 0; j < M; ++j) {
            int jp = (j + 1) % M;
            double coef = 0.5 * (weight[j] / grid.metric(j) + weight[jp] / grid.metric(jp));
            s += coef * (pv[jp] - pv[j]) * (pz[jp] - pz[j]) / dt;
        }
        total += s;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Band (thin) operators
// ---------------------------------------------------------------------------

// Frame components of the physical gradient per node: tan = t-component,
// nor = nu-component.  (t, nu) is orthonormal, so |grad u|^2 = tan^2 + nor^2.
struct ThinGradient {
    ThinField tan;
    ThinField nor;
};

inline ThinGradient thin_gradient(const ThinGrid& grid, const ThinField& u) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    ThinGradient out{ThinField(u.components, M, K), ThinField(u.components, M, K)};
    const double inv2dt = 1.0 / (2.0 * grid.dtheta());
    const double invds = 1.0 / grid.dsigma();
    for (int c = 0; c < u.components; ++c) {
        for (int j = 0; j < M; ++j) {
            int jp = (j + 1) % M, jm = (j + M - 1) % M;
            const double m = grid.base().metric(j);
            const double eg = grid.epsilon() * grid.g(j);
            for (int k = 0; k < K; ++k) {
                double du_dtheta = (u.at(c, jp, k) - u.at(c, jm, k)) * inv2dt;
                double du_dsigma;
                if (k == 0)
                    du_dsigma =
                        (-3.0 * u.at(c, j, 0) + 4.0 * u.at(c, j, 1) - u.at(c, j, 2)) * 0.5 * invds;
                else if (k == K - 1)
                    du_dsigma = (3.0 * u.at(c, j, K - 1) - 4.0 * u.at(c, j, K - 2) +
                                 u.at(c, j, K - 3)) *
                                0.5 * invds;
                else
                    du_dsigma = (u.at(c, j, k + 1) - u.at(c, j, k - 1)) * 0.5 * invds;
                double s = -(grid.dg0(j) + grid.sigma(k) * grid.dg(j)) / grid.g(j);
                out.tan.at(c, j, k) = (du_dtheta + s * du_dsigma) / (m * grid.jacobian(j, k));
                out.nor.at(c, j, k) = du_dsigma / eg;
            }
        }
    }
    return out;
}

inline double norm_thin(const ThinGrid& grid, const ThinField& u, NormKind kind) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    switch (kind) {
        case NormKind::L2: {
            double s = 0.0;
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < K; ++k) {
                    double q = 0.0;
                    for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * u.at(c, j, k);
                    s += q * grid.weight(j, k);
                }
            return std::sqrt(s);
        }
        case NormKind::L4: {
            double s = 0.0;
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < K; ++k) {
                    double q = 0.0;
                    for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * u.at(c, j, k);
                    s += q * q * grid.weight(j, k);
                }
            return std::pow(s, 0.25);
        }
        case NormKind::Sup: {
            double s = 0.0;
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < K; ++k) {
                    double q = 0.0;
                    for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * u.at(c, j, k);
                    s = std::max(s, q);
                }
            return std::sqrt(s);
        }
        case NormKind::H1Seminorm: {
            ThinGradient gu = thin_gradient(grid, u);
            double s = 0.0;
            for (int c = 0; c < u.components; ++c)
                for (int j = 0; j < M; ++j)
                    for (int k = 0; k < K; ++k) {
                        double a = gu.tan.at(c, j, k), b = gu.nor.at(c, j, k);
                        s += (a * a + b * b) * grid.weight(j, k);
                    }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

// L2 inner product of two band fields (component-wise dot, node quadrature).
inline double inner_thin(const ThinGrid& grid, const ThinField& u, const ThinField& w) {
    double s = 0.0;
    for (int j = 0; j < grid.m_theta(); ++j)
        for (int k = 0; k < grid.m_sigma(); ++k) {
            double q = 0.0;
            for (int c = 0; c < u.components; ++c) q += u.at(c, j, k) * w.at(c, j, k);
            s += q * grid.weight(j, k);
        }
    return s;
}

// Cell-based energy form on the band:
//     D(u, w) = integral grad u . grad w dx
// with the per-corner edge-difference gradients described in the header
// comment.  The four nodes of cell (j,k) are (j,k),(j+1,k),(j,k+1),(j+1,k+1);
// theta wraps periodically, sigma cells span k = 0 .. m_sigma-2.
//
// Implementation detail shared with the solver assembly: at each corner the
// tangential/normal gradient components are linear functionals of the four
// cell values; visit_thin_cells enumerates (corner weight, functional) pairs.
template <class Visitor>
inline void visit_thin_cells(const ThinGrid& grid, Visitor&& visit) {
    const int M = grid.m_theta(), K = grid.m_sigma();
    const double dt = grid.dtheta(), ds = grid.dsigma();
    const double quarter = 0.25 * dt * ds;
    for (int j = 0; j < M; ++j) {
        int jp = (j + 1) % M;
        for (int k = 0; k + 1 < K; ++k) {
            // Local node order: 0=(j,k) 1=(jp,k) 2=(j,k+1) 3=(jp,k+1).
            const size_t nodes[4] = {grid.node(j, k), grid.node(jp, k), grid.node(j, k + 1),
                                     grid.node(jp, k + 1)};
            for (int corner = 0; corner < 4; ++corner) {
                const int cj = (corner & 1) ? jp : j;        // theta column of the corner
                const int ck = (corner & 2) ? k + 1 : k;     // sigma row of the corner
                const double m = grid.base().metric(cj);
                const double J = grid.jacobian(cj, ck);
                const double eg = grid.epsilon() * grid.g(cj);
                const double s = -(grid.dg0(cj) + grid.sigma(ck) * grid.dg(cj)) / grid.g(cj);
                // Edge differences adjacent to this corner:
                //   theta-edge at row ck:   (u[1 or 3] - u[0 or 2]) / dt
                //   sigma-edge at column cj:(u[2 or 3] - u[0 or 1]) / ds
                double dth[4] = {0, 0, 0, 0}, dsg[4] = {0, 0, 0, 0};
                if ((corner & 2) == 0) {
                    dth[1] = 1.0 / dt;
                    dth[0] = -1.0 / dt;
                } else {
                    dth[3] = 1.0 / dt;
                    dth[2] = -1.0 / dt;
                }
                if ((corner & 1) == 0) {
                    dsg[2] = 1.0 / ds;
                    dsg[0] = -1.0 / ds;
                } else {
                    dsg[3] = 1.0 / ds;
                    dsg[1] = -1.0 / ds;
                }
                // tan = (dth + s*dsg)/(m J),  nor = dsg/(eps g)
                double tanf[4], norf[4];
                for (int i = 0; i < 4; ++i) {
                    tanf[i] = (dth[i] + s * dsg[i]) / (m * J);
                    norf[i] = dsg[i] / eg;
                }
                const double qw = J * m * eg * quarter;  // area density * dA/4
                visit(nodes, tanf, norf, qw);
            }
        }
    }
}

inline double dirichlet_form_thin(const ThinGrid& grid, const ThinField& u, const ThinField& w) {
    double total = 0.0;
    for (int c = 0; c < u.components; ++c) {
        const double* pu = u.component(c);
        const double* pw = w.component(c);
        double s = 0.0;
        visit_thin_cells(grid, [&](const size_t* nodes, const double* tanf, const double* norf,
                                   double qw) {
            double tu = 0, tw = 0, nu_ = 0, nw = 0;
            for (int i = 0; i < 4; ++i) {
                tu += tanf[i] * pu[nodes[i]];
                tw += tanf[i] * pw[nodes[i]];
                nu_ += norf[i] * pu[nodes[i]];
                nw += norf[i] * pw[nodes[i]];
            }
            s += (tu * tw + nu_ * nw) * qw;
        });
        total += s;
    }
    return total;
}

}  // namespace thinflow
