#include "napost/newmark.hpp"

#include <stdexcept>
#include <string>

namespace napost {

NewmarkOperator::NewmarkOperator(const SparseOperator& mass, const SparseOperator& stiffness)
    : mass_(&mass), stiffness_(&stiffness) {
    if (mass.matrix.rows() != stiffness.matrix.rows())
        throw std::runtime_error("Newmark operator: mass is " + std::to_string(mass.matrix.rows()) +
                                 " x " + std::to_string(mass.matrix.cols()) + " but stiffness is " +
                                 std::to_string(stiffness.matrix.rows()) + " x " +
                                 std::to_string(stiffness.matrix.cols()));
}

const SpdSolver& NewmarkOperator::step_solver(double tau) {
    if (!(tau > 0.0))
        throw std::runtime_error("Newmark operator: step size must be positive, got " +
                                 std::to_string(tau));
    auto it = cache_.find(tau);
    if (it == cache_.end()) {
        SparseOperator op;
        op.tag = OperatorTag::other;
        op.matrix = mass_->matrix / tau + (tau / 4.0) * stiffness_->matrix;
        it = cache_.emplace(tau, std::make_unique<SpdSolver>(std::move(op))).first;
    }
    return *it->second;
}

Vec newmark_initial_step(NewmarkOperator& op, double tau0, const Vec& u0, const Vec& v0,
                         const Vec& f0, const Vec& f1) {
    const SpMat& M = op.mass().matrix;
    const SpMat& K = op.stiffness().matrix;
    const Vec rhs =
        M * (u0 / tau0 + v0 + (tau0 / 4.0) * (f1 + f0)) - (tau0 / 4.0) * (K * u0);
    return op.step_solver(tau0).solve(rhs);
}

Vec newmark_step(NewmarkOperator& op, double tau_nm1, double tau_n, const Vec& u_nm1,
                 const Vec& u_n, const Vec& f_nm1, const Vec& f_n, const Vec& f_np1) {
    const SpMat& M = op.mass().matrix;
    const SpMat& K = op.stiffness().matrix;
    const Vec rhs = M * (u_n / tau_n + (u_n - u_nm1) / tau_nm1 +
                         (tau_n * (f_np1 + f_n) + tau_nm1 * (f_n + f_nm1)) / 4.0) -
                    0.25 * (K * ((tau_n + tau_nm1) * u_n + tau_nm1 * u_nm1));
    return op.step_solver(tau_n).solve(rhs);
}

Vec velocity_update(double tau_n, const Vec& u_n, const Vec& u_np1, const Vec& v_n) {
    return 2.0 / tau_n * (u_np1 - u_n) - v_n;
}

Trajectory newmark_run(const SparseOperator& mass, const SparseOperator& stiffness,
                       const TimeGrid& grid, const Vec& u0, const Vec& v0,
                       std::vector<Vec> fs) {
    const int N = grid.steps();
    const auto dim = mass.matrix.rows();
    if (static_cast<int>(fs.size()) != N + 1)
        throw std::runtime_error("Newmark run: grid has " + std::to_string(N + 1) +
                                 " instants but " + std::to_string(fs.size()) +
                                 " datum vectors were supplied");
    if (u0.size() != dim || v0.size() != dim)
        throw std::runtime_error("Newmark run: initial data dimension " +
                                 std::to_string(u0.size()) + "/" + std::to_string(v0.size()) +
                                 " does not match the operators (" + std::to_string(dim) + ")");
    for (int n = 0; n <= N; ++n)
        if (fs[n].size() != dim)
            throw std::runtime_error("Newmark run: datum vector " + std::to_string(n) + " has " +
                                     std::to_string(fs[n].size()) + " entries, expected " +
                                     std::to_string(dim));

    NewmarkOperator op(mass, stiffness);
    Trajectory traj;
    traj.grid = grid;
    traj.f = std::move(fs);
    traj.u.reserve(N + 1);
    traj.v.reserve(N + 1);
    traj.u.push_back(u0);
    traj.v.push_back(v0);
    for (int n = 0; n < N; ++n) {
        try {
            const double tau_n = grid.tau(n);
            Vec next = n == 0 ? newmark_initial_step(op, tau_n, traj.u[0], traj.v[0], traj.f[0],
                                                     traj.f[1])
                              : newmark_step(op, grid.tau(n - 1), tau_n, traj.u[n - 1], traj.u[n],
                                             traj.f[n - 1], traj.f[n], traj.f[n + 1]);
            traj.v.push_back(velocity_update(tau_n, traj.u[n], next, traj.v[n]));
            traj.u.push_back(std::move(next));
        } catch (const std::exception& e) {
            throw std::runtime_error("time step " + std::to_string(n) + ": " + e.what());
        }
    }
    return traj;
}

}  // namespace napost
