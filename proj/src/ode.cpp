#include "napost/ode.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace napost {
namespace {

void check_span(long double tau, long double T, const char* kind) {
    if (!(tau > 0.0L) || !(T > 0.0L))
        throw std::runtime_error(std::string(kind) +
                                 " instants: need positive step and horizon, got tau = " +
                                 std::to_string(double(tau)) + ", T = " +
                                 std::to_string(double(T)));
}

long double dd2(const OdeTrajectory& tr, const std::vector<long double>& w, int n) {
    const long double tn = tr.tau(n), tm = tr.tau(n - 1);
    return ((w[n + 1] - w[n]) / tn - (w[n] - w[n - 1]) / tm) / (0.5L * (tn + tm));
}

}  // namespace

std::vector<long double> ode_uniform_instants(long double tau, long double T) {
    check_span(tau, T, "uniform");
    std::vector<long double> t{0.0L};
    for (long long k = 1; k * tau < T * (1.0L - 1e-12L); ++k) t.push_back(k * tau);
    t.push_back(T);
    return t;
}

std::vector<long double> ode_alternating_instants(long double tau_star, long double ratio,
                                                  long double T) {
    check_span(tau_star, T, "alternating");
    if (!(ratio > 0.0L && ratio <= 1.0L))
        throw std::runtime_error("alternating instants: ratio must lie in (0, 1], got " +
                                 std::to_string(double(ratio)));
    if (tau_star >= T)
        throw std::runtime_error("alternating instants: tau_star = " +
                                 std::to_string(double(tau_star)) + " must be < T = " +
                                 std::to_string(double(T)));
    std::vector<long double> t{0.0L};
    const long double pair_len = (1.0L + ratio) * tau_star;
    for (long long k = 1;; ++k) {
        const long double tk =
            (long double)(k / 2) * pair_len + (k % 2 ? ratio * tau_star : 0.0L);
        if (tk >= T * (1.0L - 1e-12L)) break;
        t.push_back(tk);
    }
    t.push_back(T);
    return t;
}

OdeTrajectory ode_run(const OdeProblem& problem, std::vector<long double> instants) {
    if (instants.size() < 2)
        throw std::runtime_error("scalar run: need at least one step, got " +
                                 std::to_string(instants.size()) + " instants");
    OdeTrajectory tr;
    tr.t = std::move(instants);
    const int N = tr.steps();
    tr.f.resize(N + 1);
    for (int n = 0; n <= N; ++n) tr.f[n] = problem.f ? problem.f(tr.t[n]) : 0.0L;
    tr.u.reserve(N + 1);
    tr.v.reserve(N + 1);
    tr.u.push_back(problem.u0);
    tr.v.push_back(problem.v0);

    const long double A = problem.A;
    auto pivot = [&](long double tau) {
        const long double d = 1.0L / tau + tau * A / 4.0L;
        if (d == 0.0L)
            throw std::runtime_error("scalar step pivot 1 + A tau^2/4 vanishes at tau = " +
                                     std::to_string(double(tau)) + ", A = " +
                                     std::to_string(double(A)));
        return d;
    };

    for (int n = 0; n < N; ++n) {
        const long double tau_n = tr.tau(n);
        long double next;
        if (n == 0) {
            const long double rhs = tr.u[0] / tau_n + tr.v[0] +
                                    tau_n / 4.0L * (tr.f[1] + tr.f[0]) -
                                    tau_n / 4.0L * A * tr.u[0];
            next = rhs / pivot(tau_n);
        } else {
            const long double tau_m = tr.tau(n - 1);
            const long double rhs =
                tr.u[n] / tau_n + (tr.u[n] - tr.u[n - 1]) / tau_m +
                (tau_n * (tr.f[n + 1] + tr.f[n]) + tau_m * (tr.f[n] + tr.f[n - 1])) / 4.0L -
                A / 4.0L * ((tau_n + tau_m) * tr.u[n] + tau_m * tr.u[n - 1]);
            next = rhs / pivot(tau_n);
        }
        tr.v.push_back(2.0L * (next - tr.u[n]) / tau_n - tr.v[n]);
        tr.u.push_back(next);
    }
    return tr;
}

OdeEta ode_eta_T(const OdeTrajectory& tr, long double A) {
    const int N = tr.steps();
    if (N < 2)
        throw std::runtime_error("scalar time estimator needs at least 2 steps, got " +
                                 std::to_string(N));
    auto indicator = [&](int k) {
        const long double d2u = dd2(tr, tr.u, k);
        const long double d2v = dd2(tr, tr.v, k);
        const long double d2f = dd2(tr, tr.f, k);
        const long double r = d2f - A * d2u;
        return std::sqrt(A * d2v * d2v + r * r);
    };
    OdeEta eta;
    eta.per_step.resize(N);
    eta.per_step[0] =
        (5.0L * tr.tau(0) * tr.tau(0) / 12.0L + tr.tau(1) * tr.tau(0) / 2.0L) * indicator(1);
    for (int k = 1; k < N; ++k)
        eta.per_step[k] =
            (tr.tau(k) * tr.tau(k) / 12.0L + tr.tau(k - 1) * tr.tau(k) / 8.0L) * indicator(k);
    eta.total = 0.0L;
    for (int k = 0; k < N; ++k) eta.total += tr.tau(k) * eta.per_step[k];
    return eta;
}

long double ode_error(const OdeTrajectory& tr, long double A,
                      const std::function<long double(long double)>& exact_u,
                      const std::function<long double(long double)>& exact_v) {
    long double worst = 0.0L;
    for (std::size_t n = 0; n < tr.t.size(); ++n) {
        const long double du = tr.u[n] - exact_u(tr.t[n]);
        const long double dv = tr.v[n] - exact_v(tr.t[n]);
        worst = std::max(worst, std::sqrt(dv * dv + A * du * du));
    }
    return worst;
}

}  // namespace napost
