#pragma once

#include <map>
#include <memory>
#include <vector>

#include "napost/fem.hpp"
#include "napost/mesh.hpp"

namespace napost {

// Discrete solution of the second-order system M u'' + K u = M f: one
// displacement, velocity and datum vector per grid instant. Produced by
// newmark_run and treated as read-only afterwards.
struct Trajectory {
    TimeGrid grid;
    std::vector<Vec> u;
    std::vector<Vec> v;
    std::vector<Vec> f;

    int steps() const { return grid.steps(); }
};

// Holds M, K and a factorization cache for (M/tau + tau/4 K): each distinct
// step size is factorized once and reused on every later step with that size.
class NewmarkOperator {
  public:
    NewmarkOperator(const SparseOperator& mass, const SparseOperator& stiffness);

    const SparseOperator& mass() const { return *mass_; }
    const SparseOperator& stiffness() const { return *stiffness_; }
    const SpdSolver& step_solver(double tau);
    int cached_factorizations() const { return static_cast<int>(cache_.size()); }

  private:
    const SparseOperator* mass_;
    const SparseOperator* stiffness_;
    std::map<double, std::unique_ptr<SpdSolver>> cache_;
};

// Trapezoidal (average-acceleration) starting step:
//   (M/tau0 + tau0/4 K) u1 = M (u0/tau0 + v0 + tau0/4 (f1 + f0)) - tau0/4 K u0.
Vec newmark_initial_step(NewmarkOperator& op, double tau0, const Vec& u0, const Vec& v0,
                         const Vec& f0, const Vec& f1);

// Two-history interior step on a (possibly nonuniform) grid:
//   (M/tau_n + tau_n/4 K) u^{n+1} =
//     M [u^n/tau_n + (u^n - u^{n-1})/tau_nm1
//        + (tau_n (f^{n+1} + f^n) + tau_nm1 (f^n + f^{n-1}))/4]
//     - 1/4 K [(tau_n + tau_nm1) u^n + tau_nm1 u^{n-1}].
Vec newmark_step(NewmarkOperator& op, double tau_nm1, double tau_n, const Vec& u_nm1,
                 const Vec& u_n, const Vec& f_nm1, const Vec& f_n, const Vec& f_np1);

// v^{n+1} = 2 (u^{n+1} - u^n)/tau_n - v^n.
Vec velocity_update(double tau_n, const Vec& u_n, const Vec& u_np1, const Vec& v_n);

// March the full grid; fs holds one datum vector per instant. Failures are
// reported with the index of the offending step.
Trajectory newmark_run(const SparseOperator& mass, const SparseOperator& stiffness,
                       const TimeGrid& grid, const Vec& u0, const Vec& v0,
                       std::vector<Vec> fs);

}  // namespace napost
