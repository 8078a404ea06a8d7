#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <memory>

#include "napost/mesh.hpp"

namespace napost {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

using SpatialFn = std::function<double(double, double)>;
using SpatialGradFn = std::function<std::array<double, 2>(double, double)>;

// Bijection between unknowns and the mesh nodes carrying them.
struct DofMap {
    std::vector<int> dof_of_node;  // -1 on constrained nodes
    std::vector<int> node_of_dof;

    int dof_count() const { return static_cast<int>(node_of_dof.size()); }

    // Homogeneous Dirichlet space: boundary nodes are constrained to zero.
    static DofMap interior(const Mesh& mesh);
    // Unconstrained space over every node (diagnostics and tests).
    static DofMap all_nodes(const Mesh& mesh);
};

// Value of the coefficient vector at a mesh node, zero on constrained nodes.
inline double node_value(const DofMap& dofs, const Vec& w, int node) {
    const int d = dofs.dof_of_node[node];
    return d < 0 ? 0.0 : w[d];
}

enum class OperatorTag { mass, stiffness, other };

struct SparseOperator {
    OperatorTag tag = OperatorTag::other;
    SpMat matrix;  // symmetric, bit-identically so across the diagonal
};

// Piecewise-linear function given by its coefficients on a DofMap.
struct DiscreteField {
    std::shared_ptr<const DofMap> dofs;
    Vec coeffs;
};

enum class DataMode { nodal, projection };

// Fixed triangle quadrature, exact through polynomial degree 4.
struct QuadRule {
    static constexpr int npts = 6;
    std::array<std::array<double, 3>, npts> bary;
    std::array<double, npts> weight;  // sums to 1; scale by triangle area
};
const QuadRule& quadrature_order4();

// Gradients of the three barycentric basis functions on one triangle.
std::array<std::array<double, 2>, 3> barycentric_gradients(const Mesh& mesh, int tri);

SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofs);
SparseOperator assemble_stiffness(const Mesh& mesh, const DofMap& dofs);

// Cached Cholesky factorization; every solve is verified to a residual of
// 1e-12 relative to the backward-stable scale ||A|| ||x|| + ||b||, and
// failure throws.
class SpdSolver {
  public:
    explicit SpdSolver(SparseOperator op);
    Vec solve(const Vec& rhs) const;
    const SparseOperator& op() const { return op_; }

  private:
    SparseOperator op_;
    Eigen::SimplicialLLT<SpMat> llt_;
    double norm_ = 0.0;  // infinity norm of the operator
};

// b_i = integral of g * phi_i (order-4 quadrature).
Vec load_vector(const Mesh& mesh, const DofMap& dofs, const SpatialFn& g);

DiscreteField nodal_interpolate(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                                const SpatialFn& g);
// L2 projection: solve M c = (g, phi_i).
DiscreteField l2_project(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                         const SpatialFn& g, const SpdSolver& mass_solver);
// H1_0 (elliptic) projection: solve K c = (grad g, grad phi_i).
DiscreteField h1_project(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                         const SpatialGradFn& grad_g, const SpdSolver& stiffness_solver);

// Discrete Laplacian action M^{-1} K w, evaluated lazily through a solve.
Vec apply_Ah(const SpdSolver& mass_solver, const SparseOperator& stiffness, const Vec& w);

double norm_l2(const SparseOperator& mass, const Vec& w);
double seminorm_h1(const SparseOperator& stiffness, const Vec& w);

// Quadrature integrals of (w_h - g)^2 and |grad w_h - grad g|^2.
double l2_error_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w, const SpatialFn& g);
double h1_error_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w, const SpatialGradFn& grad_g);

}  // namespace napost
