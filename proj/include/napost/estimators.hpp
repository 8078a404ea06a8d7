#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "napost/fem.hpp"
#include "napost/mesh.hpp"
#include "napost/newmark.hpp"

namespace napost {

namespace detail {
inline void check_dd_range(int n, int count) {
    if (n < 1 || n + 1 >= count)
        throw std::runtime_error("divided difference at step " + std::to_string(n) +
                                 " needs neighbours " + std::to_string(n - 1) + " and " +
                                 std::to_string(n + 1) + "; sequence has " +
                                 std::to_string(count) + " entries");
}
}  // namespace detail

// First central divided difference (w^{n+1} - w^{n-1}) / (tau_n + tau_{n-1}).
template <class V>
V divided_diff1(const TimeGrid& grid, const std::vector<V>& w, int n) {
    detail::check_dd_range(n, static_cast<int>(w.size()));
    return V((w[n + 1] - w[n - 1]) / (grid.tau(n) + grid.tau(n - 1)));
}

// Second divided difference
//   ((w^{n+1} - w^n)/tau_n - (w^n - w^{n-1})/tau_{n-1}) / tau_{n-1/2};
// exact second derivative for quadratics in t on any step pattern.
template <class V>
V divided_diff2(const TimeGrid& grid, const std::vector<V>& w, int n) {
    detail::check_dd_range(n, static_cast<int>(w.size()));
    return V(((w[n + 1] - w[n]) / grid.tau(n) - (w[n] - w[n - 1]) / grid.tau(n - 1)) /
             grid.tau_half(n));
}

// Value at time t of the piecewise-quadratic reconstruction through the grid
// values: on [t_n, t_{n+1}] with n >= 1 the parabola through instants
// n-1, n, n+1; on [t_0, t_1] the one through instants 0, 1, 2. Continuous at
// every interior instant.
template <class V>
V eval_reconstruction(const TimeGrid& grid, const std::vector<V>& w, double t) {
    const int N = grid.steps();
    if (static_cast<int>(w.size()) != N + 1)
        throw std::runtime_error("reconstruction: " + std::to_string(w.size()) +
                                 " values for " + std::to_string(N + 1) + " instants");
    if (N < 2) throw std::runtime_error("reconstruction needs at least 2 steps");
    if (t < grid.instants.front() || t > grid.instants.back())
        throw std::runtime_error("reconstruction time " + std::to_string(t) +
                                 " lies outside [0, " + std::to_string(grid.total_time()) + "]");
    int n = 0;
    while (n + 1 < N && grid.instants[n + 1] < t) ++n;
    const int c = std::max(n, 1);  // parabola centre
    const double t0 = grid.instants[c - 1], t1 = grid.instants[c], t2 = grid.instants[c + 1];
    const double l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    const double l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    const double l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    return V(l0 * w[c - 1] + l1 * w[c] + l2 * w[c + 1]);
}

// Discrete elliptic image of the second displacement difference,
// z^k = M^{-1} K d2(u)^k, so (z^k, phi) = (grad d2(u)^k, grad phi).
Vec compute_zh(const Trajectory& traj, const SpdSolver& mass_solver,
               const SparseOperator& stiffness, int k);

// Sum over triangles of h_K^2 times the exact L2(K)^2 integral of the
// piecewise-linear function w.
double weighted_elem_l2_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w);

// Per interior edge (aligned with mesh.interior_edges): h_E times the squared
// L2 norm over the edge of the normal-gradient jump of w.
std::vector<double> jump_l2_sq(const Mesh& mesh, const DofMap& dofs, const Vec& w);
double jump_l2_sq_total(const Mesh& mesh, const DofMap& dofs, const Vec& w);

// Weighted second-difference indicator behind the time estimator:
//   I(k) = |d2(v)^k|_{H1} + ||d2(f)^k - z^k||_{L2},
//   step k >= 1: (tau_k^2/12 + tau_{k-1} tau_k / 8) I(k),
//   step 0:      (5 tau_0^2/12 + tau_1 tau_0 / 2) I(1).
double eta_T_step(const Trajectory& traj, const SpdSolver& mass_solver,
                  const SparseOperator& stiffness, int k);

struct EstimatorConfig {
    double C1 = 1.0;  // scales eta_S1
    double C2 = 1.0;  // scales eta_S2
    double C3 = 1.0;  // scales the eta_S3 diagnostic
    bool include_N0 = true;
    DataMode data_mode = DataMode::nodal;
};

struct EstimatorReport {
    std::vector<double> eta_T_per_step;  // k = 0..N-1
    double eta_T_total = 0.0;            // sum of tau_k * eta_T_per_step[k]
    double eta_S1 = 0.0;
    double eta_S2 = 0.0;
    double eta_S3 = 0.0;  // reported for diagnosis; never part of eta_S
    double C1 = 1.0, C2 = 1.0;
    std::optional<double> N0;
    std::optional<double> M1, M2;   // filled when the exact initial datum is known
    std::optional<double> e, ei;    // filled when the exact solution is known

    double eta_S() const { return C1 * eta_S1 + C2 * eta_S2; }
};

// Space-time residual estimates for a trajectory. M1/M2/e/ei are left empty;
// callers with analytic data fill them.
EstimatorReport compute_estimates(const Mesh& mesh, const DofMap& dofs, const Trajectory& traj,
                                  const SpdSolver& mass_solver, const SparseOperator& stiffness,
                                  const EstimatorConfig& config);

// Data-consistency and stability numbers. N0 uses the trajectory's own
// discrete initial data; M1/M2 use the supplied L2 projection of the exact
// initial displacement. The Z sequence (instants n = 2..N-1) is defined on
// uniform grids only and a nonuniform grid is a contract violation.
struct StabilityDiagnostics {
    double N0 = 0.0;
    double M1 = 0.0;
    double M2 = 0.0;
    std::vector<double> Z;  // Z[j] belongs to instant n = j + 2
};

StabilityDiagnostics compute_diagnostics(const Trajectory& traj, const SpdSolver& mass_solver,
                                         const SparseOperator& stiffness, const Vec& l2_proj_u0);

}  // namespace napost
