#ifndef PORESIM_DIFFUSION_HPP
#define PORESIM_DIFFUSION_HPP

#include "poresim/network.hpp"

#include <Eigen/Sparse>

namespace poresim {

/// Graph diffusion operator acting on node mass vectors:
///   entry (i,i) = -(1/v_i) * sum_j Q_ij,   entry (i,j) = Q_ij / v_j.
/// Columns sum to zero (mass conservation); off-diagonals are nonnegative and
/// the diagonal nonpositive, which makes the implicit step positivity
/// preserving. `edges` keeps the (i, j, Q) triplets so solvers can rebuild the
/// symmetric conductance Laplacian from the exact conductances.
struct DiffusionOperator {
    Eigen::SparseMatrix<double> mass_op;  // the operator above, n x n
    Eigen::VectorXd volumes;              // v_i in um^3

    struct Conductance {
        int i, j;
        double q;
    };
    std::vector<Conductance> edges;

    int size() const { return static_cast<int>(volumes.size()); }
};

/// Assembles the operator from the network. Throws InputError on empty
/// networks or non-positive node volumes.
DiffusionOperator assemble(const PoreNetwork& net);

/// Mass rate vector D * (op M). The entries sum to zero up to roundoff: what
/// leaves one pore enters its neighbors.
Eigen::VectorXd apply(const DiffusionOperator& op, const Eigen::VectorXd& masses,
                      double diffusion_coeff);

/// Repeated implicit solves against a fixed (operator, D, dt) triple. The
/// backward-Euler system (I - dt*D*op) M+ = M is solved in the equivalent
/// symmetric positive definite concentration form
///   (diag(v) + dt*D*L) u = M,  M+ = diag(v) u,
/// where L is the conductance-weighted graph Laplacian. A Cholesky
/// factorization is computed once; every solve is checked against the
/// mass-form residual and polished by iterative refinement until the relative
/// residual is at or below `tol`.
class DiffusionSolver {
public:
    DiffusionSolver(const DiffusionOperator& op, double diffusion_coeff, double dt,
                    double tol = 1e-10);

    /// Solves one implicit step. Nonnegative input gives nonnegative output
    /// (M-matrix structure) and the total mass is preserved to solver
    /// precision. Throws NumericalError if the residual cannot be driven
    /// below tol.
    Eigen::VectorXd solve(const Eigen::VectorXd& masses) const;

    double dt() const { return dt_; }
    double diffusion_coeff() const { return d_; }

private:
    const DiffusionOperator& op_;
    double d_;
    double dt_;
    double tol_;
    Eigen::SparseMatrix<double> system_;  // diag(v) + dt*D*L
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;
};

/// One-shot convenience wrapper around DiffusionSolver.
Eigen::VectorXd implicit_diffusion_step(const DiffusionOperator& op,
                                        const Eigen::VectorXd& masses,
                                        double diffusion_coeff, double dt,
                                        double tol = 1e-10);

} // namespace poresim

#endif
