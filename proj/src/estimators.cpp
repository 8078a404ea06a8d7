#include "napost/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "napost/parallel.hpp"

namespace napost {

Vec compute_zh(const Trajectory& traj, const SpdSolver& mass_solver,
               const SparseOperator& stiffness, int k) {
    return apply_Ah(mass_solver, stiffness, divided_diff2(traj.grid, traj.u, k));
}

double weighted_elem_l2_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w) {
    return parallel_sum(mesh.triangle_count(), [&](std::size_t t) {
        const auto& v = mesh.triangles[t].v;
        const double w0 = node_value(dofs, w, v[0]);
        const double w1 = node_value(dofs, w, v[1]);
        const double w2 = node_value(dofs, w, v[2]);
        // exact integral of a squared linear: area/6 * (sum of squares + pairwise products)
        const double s = w0 * w0 + w1 * w1 + w2 * w2 + w0 * w1 + w1 * w2 + w0 * w2;
        return mesh.h_K[t] * mesh.h_K[t] * mesh.area[t] / 6.0 * s;
    });
}

namespace {

double edge_jump_term(const Mesh& mesh, const DofMap& dofs, const Vec& w,
                      const InteriorEdge& e) {
    auto grad_on = [&](int t) {
        const auto& v = mesh.triangles[t].v;
        const auto grad = barycentric_gradients(mesh, t);
        std::array<double, 2> g{0.0, 0.0};
        for (int c = 0; c < 3; ++c) {
            const double wc = node_value(dofs, w, v[c]);
            g[0] += wc * grad[c][0];
            g[1] += wc * grad[c][1];
        }
        return g;
    };
    const auto gl = grad_on(e.left);
    const auto gr = grad_on(e.right);
    const auto& pa = mesh.nodes[e.a];
    const auto& pb = mesh.nodes[e.b];
    // (dy, -dx) is the edge normal scaled by h_E, which folds the edge-length
    // weight of h_E * L2(E)^2 into the square.
    const double jump =
        (gl[0] - gr[0]) * (pb[1] - pa[1]) - (gl[1] - gr[1]) * (pb[0] - pa[0]);
    return jump * jump;
}

}  // namespace

std::vector<double> jump_l2_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w) {
    std::vector<double> out(mesh.interior_edges.size());
    parallel_chunks(mesh.interior_edges.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e)
            out[e] = edge_jump_term(mesh, dofs, w, mesh.interior_edges[e]);
    });
    return out;
}

double jump_l2_sq_total(const Mesh& mesh, const DofMap& dofs, const Vec& w) {
    return parallel_sum(mesh.interior_edges.size(), [&](std::size_t e) {
        return edge_jump_term(mesh, dofs, w, mesh.interior_edges[e]);
    });
}

namespace {

double second_difference_indicator(const Trajectory& traj, const SpdSolver& mass_solver,
                                   const SparseOperator& stiffness, int k) {
    const Vec d2v = divided_diff2(traj.grid, traj.v, k);
    const Vec d2f = divided_diff2(traj.grid, traj.f, k);
    const Vec z = compute_zh(traj, mass_solver, stiffness, k);
    return seminorm_h1(stiffness, d2v) + norm_l2(mass_solver.op(), Vec(d2f - z));
}

double eta_T_weight(const TimeGrid& g, int k) {
    if (k == 0) return 5.0 * g.tau(0) * g.tau(0) / 12.0 + g.tau(1) * g.tau(0) / 2.0;
    return g.tau(k) * g.tau(k) / 12.0 + g.tau(k - 1) * g.tau(k) / 8.0;
}

void require_two_steps(const Trajectory& traj) {
    if (traj.steps() < 2)
        throw std::runtime_error("estimators need at least 2 time steps, got " +
                                 std::to_string(traj.steps()));
}

}  // namespace

double eta_T_step(const Trajectory& traj, const SpdSolver& mass_solver,
                  const SparseOperator& stiffness, int k) {
    require_two_steps(traj);
    if (k < 0 || k >= traj.steps())
        throw std::runtime_error("time estimator step " + std::to_string(k) +
                                 " outside [0, " + std::to_string(traj.steps()) + ")");
    return eta_T_weight(traj.grid, k) *
           second_difference_indicator(traj, mass_solver, stiffness, std::max(k, 1));
}

EstimatorReport compute_estimates(const Mesh& mesh, const DofMap& dofs, const Trajectory& traj,
                                  const SpdSolver& mass_solver, const SparseOperator& stiffness,
                                  const EstimatorConfig& config) {
    require_two_steps(traj);
    const TimeGrid& g = traj.grid;
    const int N = traj.steps();

    EstimatorReport rep;
    rep.C1 = config.C1;
    rep.C2 = config.C2;

    std::vector<double> indicator(N, 0.0);  // I(k), defined for k = 1..N-1
    for (int k = 1; k < N; ++k)
        indicator[k] = second_difference_indicator(traj, mass_solver, stiffness, k);
    rep.eta_T_per_step.resize(N);
    rep.eta_T_per_step[0] = eta_T_weight(g, 0) * indicator[1];
    for (int k = 1; k < N; ++k) rep.eta_T_per_step[k] = eta_T_weight(g, k) * indicator[k];
    rep.eta_T_total = 0.0;
    for (int k = 0; k < N; ++k) rep.eta_T_total += g.tau(k) * rep.eta_T_per_step[k];

    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int n = 1; n < N; ++n) {
        const Vec dv = divided_diff1(g, traj.v, n);
        const double a1 = weighted_elem_l2_sq(mesh, dofs, Vec(dv - traj.f[n])) +
                          jump_l2_sq_total(mesh, dofs, traj.u[n]);
        s1 = std::max(s1, std::sqrt(a1));

        const Vec d2v = divided_diff2(g, traj.v, n);
        const Vec df = divided_diff1(g, traj.f, n);
        const Vec du = divided_diff1(g, traj.u, n);
        const double a2 = weighted_elem_l2_sq(mesh, dofs, Vec(d2v - df)) +
                          jump_l2_sq_total(mesh, dofs, du);
        s2 += g.tau(n) * std::sqrt(a2);
    }
    for (int m = 2; m < N; ++m) {
        const Vec jump = Vec(divided_diff2(g, traj.v, m)) - Vec(divided_diff2(g, traj.v, m - 1));
        s3 += g.tau(m - 1) * std::sqrt(weighted_elem_l2_sq(mesh, dofs, jump));
    }
    rep.eta_S1 = s1;
    rep.eta_S2 = s2;
    rep.eta_S3 = config.C3 * s3;

    if (config.include_N0) {
        const Vec au0 = apply_Ah(mass_solver, stiffness, traj.u[0]);
        rep.N0 = norm_l2(mass_solver.op(),
                         apply_Ah(mass_solver, stiffness, Vec(au0 - traj.f[0])));
    }
    return rep;
}

StabilityDiagnostics compute_diagnostics(const Trajectory& traj, const SpdSolver& mass_solver,
                                         const SparseOperator& stiffness, const Vec& l2_proj_u0) {
    require_two_steps(traj);
    const TimeGrid& g = traj.grid;
    const int N = traj.steps();
    const double tau0 = g.tau(0);
    for (int n = 1; n < N; ++n)
        if (std::abs(g.tau(n) - tau0) > 1e-12 * tau0)
            throw std::runtime_error(
                "stability diagnostics are defined on uniform time grids only; step " +
                std::to_string(n) + " has size " + std::to_string(g.tau(n)) +
                " but step 0 has " + std::to_string(tau0));

    StabilityDiagnostics d;
    const Vec au0 = apply_Ah(mass_solver, stiffness, traj.u[0]);
    d.N0 = norm_l2(mass_solver.op(),
                   apply_Ah(mass_solver, stiffness, Vec(au0 - traj.f[0])));
    d.M1 = norm_l2(mass_solver.op(), apply_Ah(mass_solver, stiffness, l2_proj_u0));
    d.M2 = seminorm_h1(stiffness, l2_proj_u0);
    for (int n = 2; n < N; ++n) {
        const Vec d2f = divided_diff2(g, traj.f, n);
        const Vec d2u = divided_diff2(g, traj.u, n);
        const Vec d2v = divided_diff2(g, traj.v, n);
        const double l2 =
            norm_l2(mass_solver.op(), Vec(d2f - apply_Ah(mass_solver, stiffness, d2u)));
        const double h1 = seminorm_h1(stiffness, d2v);
        d.Z.push_back(std::sqrt(l2 * l2 + h1 * h1));
    }
    return d;
}

}  // namespace napost
