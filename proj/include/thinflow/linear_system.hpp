// linear_system.hpp
//
// Sparse assembly of the energy-form operators and the linear solves behind
// the implicit diffusion step.  Storage and factorization delegate to Eigen:
// the operator is banded up to the periodic theta wrap, so a sparse Cholesky
// (SimplicialLDLT) plays the role of a factor-once banded solve; the
// alternative is preconditioned conjugate gradients.
#pragma once

#include <Eigen/Sparse>

#include "thinflow/operators.hpp"

namespace thinflow {

using SpMat = Eigen::SparseMatrix<double>;

enum class LinearSolverKind { Direct, ConjugateGradient };

struct LinearSolverSpec {
    LinearSolverKind kind = LinearSolverKind::Direct;
    double cg_tol = 1e-12;
    int cg_max_iter = 2000;
};

// Stiffness of the band energy form (cell assembly; see operators.hpp).
inline SpMat assemble_thin_stiffness(const ThinGrid& grid) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(grid.nodes() * 16);
    visit_thin_cells(grid, [&](const size_t* nodes, const double* tanf, const double* norf,
                               double qw) {
        for (int i = 0; i < 4; ++i)
            for (int l = 0; l < 4; ++l) {
                double v = (tanf[i] * tanf[l] + norf[i] * norf[l]) * qw;
                if (v != 0.0)
                    trips.emplace_back(static_cast<int>(nodes[i]), static_cast<int>(nodes[l]), v);
            }
    });
    SpMat A(static_cast<int>(grid.nodes()), static_cast<int>(grid.nodes()));
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

// Stiffness of the weighted curve energy form (1D cells, periodic).
inline SpMat assemble_surface_stiffness(const SurfaceGrid& grid,
                                        const std::vector<double>& weight) {
    const int M = grid.m_theta();
    const double dt = grid.dtheta();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(M) * 4);
    for (int j = 0; j < M; ++j) {
        int jp = (j + 1) % M;
        double coef = 0.5 * (weight[j] / grid.metric(j) + weight[jp] / grid.metric(jp)) / dt;
        trips.emplace_back(j, j, coef);
        trips.emplace_back(jp, jp, coef);
        trips.emplace_back(j, jp, -coef);
        trips.emplace_back(jp, j, -coef);
    }
    SpMat A(M, M);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

// Diagonal (lumped) mass vectors.
inline std::vector<double> thin_lumped_mass(const ThinGrid& grid) {
    std::vector<double> m(grid.nodes());
    for (size_t n = 0; n < grid.nodes(); ++n) m[n] = grid.weight(n);
    return m;
}

inline std::vector<double> surface_lumped_mass(const SurfaceGrid& grid,
                                               const std::vector<double>& weight) {
    std::vector<double> m(grid.m_theta());
    for (int j = 0; j < grid.m_theta(); ++j) m[j] = weight[j] * grid.weight(j);
    return m;
}

// Factor-once wrapper for systems (diag(mass)/dt + coef*A) x = rhs.
class ImplicitSolve {
  public:
    ImplicitSolve() = default;

    void prepare(const SpMat& stiffness, const std::vector<double>& mass, double mass_scale,
                 double stiffness_coef, const LinearSolverSpec& spec) {
        spec_ = spec;
        // The system matrix must outlive the solves: the iterative solver
        // keeps a reference to it rather than copying (the direct
        // factorization copies, but sharing the member is harmless there).
        system_ = stiffness * stiffness_coef;
        SpMat D(system_.rows(), system_.cols());
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(mass.size());
        for (int i = 0; i < static_cast<int>(mass.size()); ++i)
            trips.emplace_back(i, i, mass[i] * mass_scale);
        D.setFromTriplets(trips.begin(), trips.end());
        system_ += D;
        if (spec.kind == LinearSolverKind::Direct) {
            ldlt_.compute(system_);
            if (ldlt_.info() != Eigen::Success)
                throw NumericalError("implicit solve: sparse factorization failed");
        } else {
            cg_.setTolerance(spec.cg_tol);
            cg_.setMaxIterations(spec.cg_max_iter);
            cg_.compute(system_);
            if (cg_.info() != Eigen::Success)
                throw NumericalError("implicit solve: conjugate-gradient setup failed");
        }
        ready_ = true;
    }

    bool ready() const { return ready_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        if (!ready_) throw NumericalError("implicit solve: not prepared");
        if (spec_.kind == LinearSolverKind::Direct) return ldlt_.solve(rhs);
        Eigen::VectorXd x = cg_.solve(rhs);
        if (cg_.info() != Eigen::Success)
            throw NumericalError("implicit solve: conjugate gradients did not converge (" +
                                 std::to_string(cg_.iterations()) + " iterations, error " +
                                 format_double(cg_.error()) + ")");
        return x;
    }

  private:
    LinearSolverSpec spec_;
    SpMat system_;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg_;
    bool ready_ = false;
};

}  // namespace thinflow
