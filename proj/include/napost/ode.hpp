#pragma once

#include <functional>
#include <vector>

namespace napost {

// Scalar model problem u'' + A u = f on [0, T]. The lab integrates in long
// double: second divided differences over ten-thousand-step grids amplify
// double-precision roundoff above the quantities being measured.
struct OdeProblem {
    long double A = 0.0L;
    std::function<long double(long double)> f;  // forcing; null means zero
    long double u0 = 0.0L;
    long double v0 = 0.0L;
    long double T = 1.0L;
};

struct OdeTrajectory {
    std::vector<long double> t, u, v, f;

    int steps() const { return static_cast<int>(t.size()) - 1; }
    long double tau(int n) const { return t[n + 1] - t[n]; }
};

// Uniform instants with the final step truncated (or snapped) to T.
std::vector<long double> ode_uniform_instants(long double tau, long double T);
// Steps alternate ratio*tau_star then tau_star, small step first, final step
// truncated to T; closed-form instants avoid accumulation drift.
std::vector<long double> ode_alternating_instants(long double tau_star, long double ratio,
                                                  long double T);

// Average-acceleration march of the scalar problem over the given instants.
// Throws if a step's pivot 1 + A tau^2/4 vanishes.
OdeTrajectory ode_run(const OdeProblem& problem, std::vector<long double> instants);

struct OdeEta {
    std::vector<long double> per_step;  // k = 0..N-1
    long double total = 0.0L;           // sum of tau_k * per_step[k]
};

// Three-point time estimator with indicator
//   I(k) = sqrt(A * d2(v)^2 + (d2(f) - A d2(u))^2),
// weights as in the field version (step 0 borrows I(1)).
OdeEta ode_eta_T(const OdeTrajectory& traj, long double A);

// max over grid instants of sqrt((v_n - u'(t_n))^2 + A (u_n - u(t_n))^2).
long double ode_error(const OdeTrajectory& traj, long double A,
                      const std::function<long double(long double)>& exact_u,
                      const std::function<long double(long double)>& exact_v);

}  // namespace napost
