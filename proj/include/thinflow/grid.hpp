// grid.hpp
//
// Tensor grids on the midline curve and on the band, plus the plain field
// containers that live on them.
//
//   SurfaceGrid: m_theta equispaced nodes theta_j = 2*pi*j/m_theta (periodic).
//     Quadrature weight per node: m(theta_j) * dtheta  (the equal-weight
//     periodic rule, spectrally accurate for smooth integrands).
//
//   ThinGrid: tensor (theta_j, sigma_k) with sigma_k = k/(m_sigma-1)
//     including both band faces.  Node quadrature weight
//         w_jk = J * m * eps*g * dtheta * wsig_k,
//     trapezoid in sigma, so that sums over nodes approximate integrals over
//     the band in Euclidean measure (dx = J m eps g dtheta dsigma).  The
//     trapezoid rule is exact in sigma whenever the integrand is affine in r,
//     which makes several closed-form oracles exact at quadrature level.
//
// Fields are stored flat, component-major:
//   SurfaceField: data[c*m_theta + j]
//   ThinField:    data[c*nn + j*m_sigma + k], nn = m_theta*m_sigma.
#pragma once

#include <cstddef>
#include <vector>

#include "thinflow/geometry.hpp"

namespace thinflow {

class SurfaceGrid {
  public:
    SurfaceGrid(const PlaneCurve& curve, int m_theta) : m_theta_(m_theta) {
        if (m_theta < 8) throw ConfigError("surface grid: m_theta must be at least 8");
        dtheta_ = kTwoPi / m_theta;
        frames_.reserve(m_theta);
        for (int j = 0; j < m_theta; ++j) frames_.push_back(curve.frame(dtheta_ * j));
    }

    int m_theta() const { return m_theta_; }
    double dtheta() const { return dtheta_; }
    double theta(int j) const { return dtheta_ * j; }
    const CurveFrame& frame(int j) const { return frames_[j]; }
    double metric(int j) const { return frames_[j].metric; }
    double weight(int j) const { return frames_[j].metric * dtheta_; }

    // Total length of the curve under the node rule.
    double length() const {
        double s = 0.0;
        for (int j = 0; j < m_theta_; ++j) s += weight(j);
        return s;
    }

  private:
    int m_theta_;
    double dtheta_;
    std::vector<CurveFrame> frames_;
};

class ThinGrid {
  public:
    ThinGrid(const ThinDomain& domain, int m_theta, int m_sigma)
        : base_(domain.curve(), m_theta), m_sigma_(m_sigma), epsilon_(domain.epsilon()) {
        if (m_sigma < 3) throw ConfigError("thin grid: m_sigma must be at least 3");
        dsigma_ = 1.0 / (m_sigma - 1);
        const int M = m_theta;
        g0_.resize(M);
        g1_.resize(M);
        g_.resize(M);
        dg0_.resize(M);
        dg1_.resize(M);
        dg_.resize(M);
        for (int j = 0; j < M; ++j) {
            double th = base_.theta(j);
            g0_[j] = domain.g0().value(th);
            g1_[j] = domain.g1().value(th);
            g_[j] = g1_[j] - g0_[j];
            dg0_[j] = domain.g0().derivative(th);
            dg1_[j] = domain.g1().derivative(th);
            dg_[j] = dg1_[j] - dg0_[j];
        }
        R_.resize(static_cast<size_t>(M) * m_sigma);
        J_.resize(R_.size());
        w_.resize(R_.size());
        for (int j = 0; j < M; ++j) {
            double kap = base_.frame(j).curvature;
            for (int k = 0; k < m_sigma; ++k) {
                double sig = dsigma_ * k;
                double r = epsilon_ * (g0_[j] + sig * g_[j]);
                double J = 1.0 - r * kap;
                size_t n = node(j, k);
                R_[n] = r;
                J_[n] = J;
                double wsig = (k == 0 || k == m_sigma - 1) ? 0.5 * dsigma_ : dsigma_;
                w_[n] = J * base_.metric(j) * epsilon_ * g_[j] * base_.dtheta() * wsig;
            }
        }
    }

    const SurfaceGrid& base() const { return base_; }
    int m_theta() const { return base_.m_theta(); }
    int m_sigma() const { return m_sigma_; }
    double epsilon() const { return epsilon_; }
    double dtheta() const { return base_.dtheta(); }
    double dsigma() const { return dsigma_; }
    double sigma(int k) const { return dsigma_ * k; }
    size_t nodes() const { return R_.size(); }
    size_t node(int j, int k) const { return static_cast<size_t>(j) * m_sigma_ + k; }

    double g0(int j) const { return g0_[j]; }
    double g1(int j) const { return g1_[j]; }
    double g(int j) const { return g_[j]; }
    double dg0(int j) const { return dg0_[j]; }
    double dg1(int j) const { return dg1_[j]; }
    double dg(int j) const { return dg_[j]; }
    double offset(int j, int k) const { return R_[node(j, k)]; }
    double jacobian(int j, int k) const { return J_[node(j, k)]; }
    double weight(int j, int k) const { return w_[node(j, k)]; }
    double weight(size_t n) const { return w_[n]; }

    // sigma-quadrature weight alone (sums to 1): trapezoid on [0,1].
    double sigma_weight(int k) const {
        return (k == 0 || k == m_sigma_ - 1) ? 0.5 * dsigma_ : dsigma_;
    }

    // Area of the band under the node rule.
    double area() const {
        double s = 0.0;
        for (double wn : w_) s += wn;
        return s;
    }

  private:
    SurfaceGrid base_;
    int m_sigma_;
    double epsilon_;
    double dsigma_;
    std::vector<double> g0_, g1_, g_, dg0_, dg1_, dg_;
    std::vector<double> R_, J_, w_;
};

// ---------------------------------------------------------------------------
// Field containers.  Deliberately plain: contiguous doubles plus shape info.
// ---------------------------------------------------------------------------
struct SurfaceField {
    int components = 0;
    int m_theta = 0;
    std::vector<double> data;

    SurfaceField() = default;
    SurfaceField(int ncomp, int m) : components(ncomp), m_theta(m) {
        data.assign(static_cast<size_t>(ncomp) * m, 0.0);
    }

    double& at(int c, int j) { return data[static_cast<size_t>(c) * m_theta + j]; }
    double at(int c, int j) const { return data[static_cast<size_t>(c) * m_theta + j]; }
    const double* component(int c) const { return data.data() + static_cast<size_t>(c) * m_theta; }
    double* component(int c) { return data.data() + static_cast<size_t>(c) * m_theta; }
};

struct ThinField {
    int components = 0;
    int m_theta = 0;
    int m_sigma = 0;
    std::vector<double> data;

    ThinField() = default;
    ThinField(int ncomp, int mt, int ms) : components(ncomp), m_theta(mt), m_sigma(ms) {
        data.assign(static_cast<size_t>(ncomp) * mt * ms, 0.0);
    }

    size_t nodes() const { return static_cast<size_t>(m_theta) * m_sigma; }
    size_t index(int c, int j, int k) const {
        return static_cast<size_t>(c) * nodes() + static_cast<size_t>(j) * m_sigma + k;
    }
    double& at(int c, int j, int k) { return data[index(c, j, k)]; }
    double at(int c, int j, int k) const { return data[index(c, j, k)]; }
    const double* component(int c) const { return data.data() + static_cast<size_t>(c) * nodes(); }
    double* component(int c) { return data.data() + static_cast<size_t>(c) * nodes(); }
};

// Restrict a surface field on a 2x-refined grid to the coarse nodes
// (fine node 2j coincides with coarse node j).
inline SurfaceField restrict_surface(const SurfaceField& fine, int coarse_m) {
    if (fine.m_theta % coarse_m != 0)
        throw ConfigError("restrict_surface: fine resolution must be a multiple of coarse");
    int stride = fine.m_theta / coarse_m;
    SurfaceField out(fine.components, coarse_m);
    for (int c = 0; c < fine.components; ++c)
        for (int j = 0; j < coarse_m; ++j) out.at(c, j) = fine.at(c, j * stride);
    return out;
}

// Restrict a thin field in theta only (sigma resolution unchanged).
inline ThinField restrict_thin_theta(const ThinField& fine, int coarse_m) {
    if (fine.m_theta % coarse_m != 0)
        throw ConfigError("restrict_thin_theta: fine resolution must be a multiple of coarse");
    int stride = fine.m_theta / coarse_m;
    ThinField out(fine.components, coarse_m, fine.m_sigma);
    for (int c = 0; c < fine.components; ++c)
        for (int j = 0; j < coarse_m; ++j)
            for (int k = 0; k < fine.m_sigma; ++k) out.at(c, j, k) = fine.at(c, j * stride, k);
    return out;
}

}  // namespace thinflow
