#include <cmath>
#include <vector>
#include <stdexcept>

#include "doctest.h"
#include "napost/ode.hpp"

using namespace napost;

namespace {

OdeProblem cosine_problem(long double A) {
    OdeProblem p;
    p.A = A;
    p.u0 = 1.0L;
    p.v0 = 0.0L;
    p.T = 1.0L;
    return p;  // exact solution cos(sqrt(A) t), forcing zero
}

long double cosine_error(const OdeTrajectory& traj, long double A) {
    const long double r = std::sqrt(A);
    return ode_error(
        traj, A, [r](long double t) { return std::cos(r * t); },
        [r](long double t) { return -r * std::sin(r * t); });
}

}  // namespace

TEST_CASE("instant generation: closed forms, truncation, small step first") {
    const auto uni = ode_uniform_instants(0.01L, 1.0L);
    REQUIRE(uni.size() == 101);
    CHECK(uni.back() == 1.0L);
    for (std::size_t k = 0; k + 1 < uni.size(); ++k) CHECK(uni[k] == k * 0.01L);

    const long double tau_star = 1.0L / 99.0L, ratio = 0.1L;
    const auto alt = ode_alternating_instants(tau_star, ratio, 1.0L);
    REQUIRE(alt.size() == 181);  // 90 exact pairs
    CHECK(alt.back() == 1.0L);
    CHECK(alt[1] == ratio * tau_star);  // the small step leads
    CHECK(alt[2] - alt[1] > alt[1]);    // followed by the big one
    for (std::size_t k = 0; k + 1 < alt.size(); ++k) CHECK(alt[k + 1] > alt[k]);

    CHECK_THROWS_AS(ode_uniform_instants(0.0L, 1.0L), std::runtime_error);
    CHECK_THROWS_AS(ode_uniform_instants(0.01L, -1.0L), std::runtime_error);
    CHECK_THROWS_AS(ode_alternating_instants(1.5L, 0.1L, 1.0L), std::runtime_error);
    CHECK_THROWS_AS(ode_alternating_instants(0.1L, 0.0L, 1.0L), std::runtime_error);
    CHECK_THROWS_AS(ode_alternating_instants(0.1L, 1.1L, 1.0L), std::runtime_error);
}

TEST_CASE("march: zero-pivot detection and minimal-input validation") {
    OdeProblem p;
    p.A = -400.0L;  // 1/tau + tau A/4 = 0 at tau = 0.1
    p.u0 = 1.0L;
    CHECK_THROWS_WITH_AS(ode_run(p, ode_uniform_instants(0.1L, 0.5L)),
                         doctest::Contains("pivot"), std::runtime_error);
    CHECK_THROWS_AS(ode_run(cosine_problem(100.0L), {0.0L}), std::runtime_error);
}

TEST_CASE("free oscillation: estimator and error both drop 100x per step decade") {
    const OdeProblem p = cosine_problem(100.0L);
    const OdeTrajectory coarse = ode_run(p, ode_uniform_instants(0.01L, 1.0L));
    const OdeTrajectory fine = ode_run(p, ode_uniform_instants(0.001L, 1.0L));

    const long double eta_c = ode_eta_T(coarse, p.A).total;
    const long double eta_f = ode_eta_T(fine, p.A).total;
    const long double e_c = cosine_error(coarse, p.A);
    const long double e_f = cosine_error(fine, p.A);

    CHECK(double(eta_c / eta_f) >= 90.0);
    CHECK(double(eta_c / eta_f) <= 110.0);
    CHECK(double(e_c / e_f) >= 90.0);
    CHECK(double(e_c / e_f) <= 110.0);
    // effectivity stays order-one on the way down
    CHECK(double(eta_c / e_c) >= 1.0);
    CHECK(double(eta_c / e_c) <= 3.5);
    CHECK(double(eta_f / e_f) >= 1.0);
    CHECK(double(eta_f / e_f) <= 3.5);
}

TEST_CASE("forced oscillation: march converges at second order") {
    // u'' + 25 u = (25 - 9) cos(3 t), u(0) = 1, u'(0) = 0 -> u = cos(3 t)
    OdeProblem p;
    p.A = 25.0L;
    p.f = [](long double t) { return 16.0L * std::cos(3.0L * t); };
    p.u0 = 1.0L;
    p.v0 = 0.0L;
    const auto error_at = [&](long double tau) {
        const OdeTrajectory traj = ode_run(p, ode_uniform_instants(tau, 1.0L));
        return ode_error(
            traj, p.A, [](long double t) { return std::cos(3.0L * t); },
            [](long double t) { return -3.0L * std::sin(3.0L * t); });
    };
    const double ratio = double(error_at(0.01L) / error_at(0.005L));
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("march agrees with a 128x finer oracle at shared instants") {
    const OdeProblem p = cosine_problem(100.0L);
    const long double tau = 0.01L;
    const OdeTrajectory coarse = ode_run(p, ode_uniform_instants(tau, 1.0L));
    const OdeTrajectory fine = ode_run(p, ode_uniform_instants(tau / 128.0L, 1.0L));

    // tau/128 is exact, so every 128th fine instant coincides bitwise
    const int Nc = coarse.steps();
    REQUIRE(fine.steps() >= 128 * (Nc - 1));
    long double worst = 0.0L;
    for (int k = 0; k <= Nc; ++k) {
        const std::size_t j = (k == Nc) ? fine.t.size() - 1 : std::size_t(128) * k;
        REQUIRE(fine.t[j] == coarse.t[k]);
        const long double du = coarse.u[k] - fine.u[j];
        const long double dv = coarse.v[k] - fine.v[j];
        worst = std::max(worst, std::sqrt(dv * dv + p.A * du * du));
    }
    // the fine march is itself second-order accurate, so its distance to the
    // coarse one reproduces the analytic error to ~1/128^2
    const long double analytic = cosine_error(coarse, p.A);
    CHECK(std::abs(double(worst - analytic)) <= 1e-4);
}

TEST_CASE("estimator total identity and reliability across the step matrix") {
    struct Config {
        long double A;
        bool alternating;
        long double ratio;
        int N;
    };
    std::vector<Config> configs;
    for (long double A : {100.0L, 1000.0L, 10000.0L}) {
        for (int N : {100, 1000, 10000}) configs.push_back({A, false, 0.0L, N});
        for (int N : {180, 1816, 18180}) configs.push_back({A, true, 0.1L, N});
        for (int N : {196, 1978, 19800}) configs.push_back({A, true, 0.01L, N});
    }
    for (const auto& c : configs) {
        CAPTURE(double(c.A));
        CAPTURE(c.N);
        CAPTURE(c.alternating);
        const OdeProblem p = cosine_problem(c.A);
        const auto instants =
            c.alternating
                ? ode_alternating_instants(1.0L / ((c.N / 2) * (1.0L + c.ratio)), c.ratio, 1.0L)
                : ode_uniform_instants(1.0L / c.N, 1.0L);
        const OdeTrajectory traj = ode_run(p, instants);
        CHECK(traj.steps() == c.N);

        const OdeEta eta = ode_eta_T(traj, p.A);
        REQUIRE(static_cast<int>(eta.per_step.size()) == traj.steps());
        long double total = 0.0L;
        for (int k = 0; k < traj.steps(); ++k) total += traj.tau(k) * eta.per_step[k];
        CHECK(double(std::abs(eta.total - total)) <= 1e-15 * double(total));

        // reliability: the estimator bounds the energy error on every config
        CHECK(double(cosine_error(traj, p.A)) <= double(eta.total));
    }

    const OdeTrajectory one_step =
        ode_run(cosine_problem(100.0L), std::vector<long double>{0.0L, 1.0L});
    CHECK_THROWS_AS(ode_eta_T(one_step, 100.0L), std::runtime_error);
}
