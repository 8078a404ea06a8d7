#include "napost/fem.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "napost/parallel.hpp"

namespace napost {

DofMap DofMap::interior(const Mesh& mesh) {
    DofMap dm;
    dm.dof_of_node.assign(mesh.node_count(), -1);
    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.node_is_boundary[i]) continue;
        dm.dof_of_node[i] = static_cast<int>(dm.node_of_dof.size());
        dm.node_of_dof.push_back(i);
    }
    return dm;
}

DofMap DofMap::all_nodes(const Mesh& mesh) {
    DofMap dm;
    dm.dof_of_node.resize(mesh.node_count());
    dm.node_of_dof.resize(mesh.node_count());
    for (int i = 0; i < mesh.node_count(); ++i) {
        dm.dof_of_node[i] = i;
        dm.node_of_dof[i] = i;
    }
    return dm;
}

const QuadRule& quadrature_order4() {
    static const QuadRule rule = [] {
        QuadRule r;
        const double a1 = 0.445948490915965, b1 = 0.108103018168070;
        const double a2 = 0.091576213509771, b2 = 0.816847572980459;
        const double w1 = 0.223381589678011, w2 = 0.109951743655322;
        r.bary = {{{b1, a1, a1},
                   {a1, b1, a1},
                   {a1, a1, b1},
                   {b2, a2, a2},
                   {a2, b2, a2},
                   {a2, a2, b2}}};
        r.weight = {w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

std::array<std::array<double, 2>, 3> barycentric_gradients(const Mesh& mesh, int tri) {
    const auto& v = mesh.triangles[tri].v;
    const auto& p0 = mesh.nodes[v[0]];
    const auto& p1 = mesh.nodes[v[1]];
    const auto& p2 = mesh.nodes[v[2]];
    const double inv2A = 1.0 / (2.0 * mesh.area[tri]);
    return {{{(p1[1] - p2[1]) * inv2A, (p2[0] - p1[0]) * inv2A},
             {(p2[1] - p0[1]) * inv2A, (p0[0] - p2[0]) * inv2A},
             {(p0[1] - p1[1]) * inv2A, (p1[0] - p0[0]) * inv2A}}};
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Push the symmetric pair with one shared value so the assembled matrix is
// bit-identically symmetric.
void push_sym(std::vector<Triplet>& out, int i, int j, double v) {
    out.emplace_back(i, j, v);
    if (i != j) out.emplace_back(j, i, v);
}

SparseOperator assemble(const Mesh& mesh, const DofMap& dofs, OperatorTag tag) {
    std::vector<Triplet> triplets;
    triplets.reserve(9 * mesh.triangle_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& v = mesh.triangles[t].v;
        const double area = mesh.area[t];
        const auto grad = barycentric_gradients(mesh, t);
        for (int a = 0; a < 3; ++a) {
            const int i = dofs.dof_of_node[v[a]];
            if (i < 0) continue;
            for (int b = a; b < 3; ++b) {
                const int j = dofs.dof_of_node[v[b]];
                if (j < 0) continue;
                const double value =
                    tag == OperatorTag::mass
                        ? area / 12.0 * (a == b ? 2.0 : 1.0)
                        : area * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1]);
                push_sym(triplets, i, j, value);
            }
        }
    }
    SparseOperator op;
    op.tag = tag;
    op.matrix.resize(dofs.dof_count(), dofs.dof_count());
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

}  // namespace

SparseOperator assemble_mass(const Mesh& mesh, const DofMap& dofs) {
    return assemble(mesh, dofs, OperatorTag::mass);
}

SparseOperator assemble_stiffness(const Mesh& mesh, const DofMap& dofs) {
    return assemble(mesh, dofs, OperatorTag::stiffness);
}

SpdSolver::SpdSolver(SparseOperator op) : op_(std::move(op)) {
    llt_.compute(op_.matrix);
    if (llt_.info() != Eigen::Success)
        throw std::runtime_error(
            "Cholesky factorization failed: operator is not symmetric positive definite");
    // Infinity norm (= 1-norm by symmetry), cached for the residual scale.
    Vec rowsum = Vec::Zero(op_.matrix.rows());
    for (int k = 0; k < op_.matrix.outerSize(); ++k)
        for (SpMat::InnerIterator it(op_.matrix, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    norm_ = rowsum.size() > 0 ? rowsum.maxCoeff() : 0.0;
}

Vec SpdSolver::solve(const Vec& rhs) const {
    if (rhs.size() != op_.matrix.rows())
        throw std::runtime_error("SPD solve: right-hand side has " + std::to_string(rhs.size()) +
                                 " entries but the operator is " +
                                 std::to_string(op_.matrix.rows()) + " x " +
                                 std::to_string(op_.matrix.cols()));
    Vec x = llt_.solve(rhs);
    // Backward-stable residual scale ||A|| ||x|| + ||b||; a plain ||b|| scale
    // would reject perfect solves of ill-conditioned stiffness systems. The
    // comparison is negated so a NaN residual also throws.
    const double scale = norm_ * x.norm() + rhs.norm();
    const double resid = (op_.matrix * x - rhs).norm();
    if (!(resid <= 1e-12 * (scale > 0.0 ? scale : 1.0)))
        throw std::runtime_error("SPD solve verification failed: scaled residual " +
                                 std::to_string(resid / (scale > 0.0 ? scale : 1.0)) +
                                 " exceeds 1e-12; the operator is ill-conditioned or not SPD");
    return x;
}

Vec load_vector(const Mesh& mesh, const DofMap& dofs, const SpatialFn& g) {
    const QuadRule& q = quadrature_order4();
    Vec b = Vec::Zero(dofs.dof_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& v = mesh.triangles[t].v;
        const auto& p0 = mesh.nodes[v[0]];
        const auto& p1 = mesh.nodes[v[1]];
        const auto& p2 = mesh.nodes[v[2]];
        for (int k = 0; k < QuadRule::npts; ++k) {
            const auto& l = q.bary[k];
            const double x = l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0];
            const double y = l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1];
            const double f = mesh.area[t] * q.weight[k] * g(x, y);
            for (int c = 0; c < 3; ++c) {
                const int d = dofs.dof_of_node[v[c]];
                if (d >= 0) b[d] += f * l[c];
            }
        }
    }
    return b;
}

DiscreteField nodal_interpolate(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                                const SpatialFn& g) {
    Vec c(dofs->dof_count());
    for (int d = 0; d < dofs->dof_count(); ++d) {
        const auto& p = mesh.nodes[dofs->node_of_dof[d]];
        c[d] = g(p[0], p[1]);
    }
    return DiscreteField{std::move(dofs), std::move(c)};
}

DiscreteField l2_project(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                         const SpatialFn& g, const SpdSolver& mass_solver) {
    Vec c = mass_solver.solve(load_vector(mesh, *dofs, g));
    return DiscreteField{std::move(dofs), std::move(c)};
}

DiscreteField h1_project(const Mesh& mesh, std::shared_ptr<const DofMap> dofs,
                         const SpatialGradFn& grad_g, const SpdSolver& stiffness_solver) {
    const QuadRule& q = quadrature_order4();
    Vec b = Vec::Zero(dofs->dof_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& v = mesh.triangles[t].v;
        const auto& p0 = mesh.nodes[v[0]];
        const auto& p1 = mesh.nodes[v[1]];
        const auto& p2 = mesh.nodes[v[2]];
        const auto grad = barycentric_gradients(mesh, t);
        for (int k = 0; k < QuadRule::npts; ++k) {
            const auto& l = q.bary[k];
            const double x = l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0];
            const double y = l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1];
            const auto dg = grad_g(x, y);
            const double s = mesh.area[t] * q.weight[k];
            for (int c = 0; c < 3; ++c) {
                const int d = dofs.get()->dof_of_node[v[c]];
                if (d >= 0) b[d] += s * (dg[0] * grad[c][0] + dg[1] * grad[c][1]);
            }
        }
    }
    Vec c = stiffness_solver.solve(b);
    return DiscreteField{std::move(dofs), std::move(c)};
}

Vec apply_Ah(const SpdSolver& mass_solver, const SparseOperator& stiffness, const Vec& w) {
    return mass_solver.solve(stiffness.matrix * w);
}

double norm_l2(const SparseOperator& mass, const Vec& w) {
    return std::sqrt(std::max(0.0, w.dot(mass.matrix * w)));
}

double seminorm_h1(const SparseOperator& stiffness, const Vec& w) {
    return std::sqrt(std::max(0.0, w.dot(stiffness.matrix * w)));
}

double l2_error_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w, const SpatialFn& g) {
    const QuadRule& q = quadrature_order4();
    return parallel_sum(mesh.triangle_count(), [&](std::size_t t) {
        const auto& v = mesh.triangles[t].v;
        const auto& p0 = mesh.nodes[v[0]];
        const auto& p1 = mesh.nodes[v[1]];
        const auto& p2 = mesh.nodes[v[2]];
        const double w0 = node_value(dofs, w, v[0]);
        const double w1 = node_value(dofs, w, v[1]);
        const double w2 = node_value(dofs, w, v[2]);
        double acc = 0.0;
        for (int k = 0; k < QuadRule::npts; ++k) {
            const auto& l = q.bary[k];
            const double x = l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0];
            const double y = l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1];
            const double diff = l[0] * w0 + l[1] * w1 + l[2] * w2 - g(x, y);
            acc += q.weight[k] * diff * diff;
        }
        return mesh.area[t] * acc;
    });
}

double h1_error_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w,
                   const SpatialGradFn& grad_g) {
    const QuadRule& q = quadrature_order4();
    return parallel_sum(mesh.triangle_count(), [&](std::size_t t) {
        const auto& v = mesh.triangles[t].v;
        const auto& p0 = mesh.nodes[v[0]];
        const auto& p1 = mesh.nodes[v[1]];
        const auto& p2 = mesh.nodes[v[2]];
        const auto grad = barycentric_gradients(mesh, static_cast<int>(t));
        double gx = 0.0, gy = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double wc = node_value(dofs, w, v[c]);
            gx += wc * grad[c][0];
            gy += wc * grad[c][1];
        }
        double acc = 0.0;
        for (int k = 0; k < QuadRule::npts; ++k) {
            const auto& l = q.bary[k];
            const double x = l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0];
            const double y = l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1];
            const auto dg = grad_g(x, y);
            const double ex = gx - dg[0], ey = gy - dg[1];
            acc += q.weight[k] * (ex * ex + ey * ey);
        }
        return mesh.area[t] * acc;
    });
}

}  // namespace napost
