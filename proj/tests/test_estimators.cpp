#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "napost/estimators.hpp"
#include "napost/newmark.hpp"

using namespace napost;

namespace {

// Synthetic but smooth trajectory data on a small interior space; the
// estimator identities hold for arbitrary sequences.
struct Fixture {
    testhelp::FemSetup s = testhelp::make_setup(4);
    Trajectory traj;

    explicit Fixture(std::vector<double> instants = {0.0, 0.15, 0.35, 0.6, 0.9}) {
        traj.grid = timegrid_from_instants(std::move(instants));
        const int dim = s.dofs->dof_count();
        for (int k = 0; k <= traj.grid.steps(); ++k) {
            Vec u(dim), v(dim), f(dim);
            const double t = traj.grid.instants[k];
            for (int i = 0; i < dim; ++i) {
                u[i] = std::sin(1.1 * t + 0.7 * i);
                v[i] = std::cos(0.9 * t + 0.3 * i);
                f[i] = std::sin(1.7 * t - 0.2 * i) + 0.4;
            }
            traj.u.push_back(u);
            traj.v.push_back(v);
            traj.f.push_back(f);
        }
    }
};

double quadratic(double t) { return 1.0 + 0.5 * t - 2.0 * t * t; }

}  // namespace

TEST_CASE("divided differences: exact on linears and quadratics, any grid") {
    const TimeGrid g = timegrid_from_instants({0.0, 0.1, 1.1, 1.45});
    std::vector<double> lin, sq;
    for (double t : g.instants) {
        lin.push_back(3.0 - 2.0 * t);
        sq.push_back(t * t);
    }
    for (int n = 1; n < g.steps(); ++n) {
        CAPTURE(n);
        CHECK(divided_diff1(g, lin, n) == doctest::Approx(-2.0).epsilon(1e-14));
        CHECK(divided_diff2(g, lin, n) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
        CHECK(divided_diff2(g, sq, n) == doctest::Approx(2.0).epsilon(1e-12));
        // the central first difference of t^2 is t_{n-1} + t_{n+1}
        CHECK(divided_diff1(g, sq, n) ==
              doctest::Approx(g.instants[n - 1] + g.instants[n + 1]).epsilon(1e-13));
    }

    // vector-valued sequences behave component-wise
    std::vector<Vec> w;
    for (double t : g.instants) {
        Vec x(2);
        x << t * t, 3.0 * t;
        w.push_back(x);
    }
    const Vec d2 = divided_diff2(g, w, 1);
    CHECK(d2[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d2[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(divided_diff1(g, lin, 0), std::runtime_error);
    CHECK_THROWS_AS(divided_diff1(g, lin, g.steps()), std::runtime_error);
    CHECK_THROWS_AS(divided_diff2(g, lin, -1), std::runtime_error);
}

TEST_CASE("reconstruction: interpolates quadratics, continuous at the knots") {
    const TimeGrid g = timegrid_from_instants({0.0, 0.2, 0.5, 1.0});
    std::vector<Vec> w;
    for (double t : g.instants) {
        Vec x(2);
        x << quadratic(t), 2.0 * quadratic(t);
        w.push_back(x);
    }

    // a quadratic is reproduced exactly everywhere
    for (double t : {0.05, 0.1, 0.35, 0.49, 0.51, 0.75, 0.99}) {
        CAPTURE(t);
        const Vec r = eval_reconstruction(g, w, t);
        CHECK(r[0] == doctest::Approx(quadratic(t)).epsilon(1e-13));
        CHECK(r[1] == doctest::Approx(2.0 * quadratic(t)).epsilon(1e-13));
    }
    // grid instants are reproduced bitwise
    for (int n = 0; n <= g.steps(); ++n) {
        const Vec r = eval_reconstruction(g, w, g.instants[n]);
        CHECK(r[0] == w[n][0]);
        CHECK(r[1] == w[n][1]);
    }
    // continuity across each interior knot
    for (int n = 1; n < g.steps(); ++n) {
        const Vec lo = eval_reconstruction(g, w, g.instants[n] - 1e-8);
        const Vec hi = eval_reconstruction(g, w, g.instants[n] + 1e-8);
        CHECK((hi - lo).lpNorm<Eigen::Infinity>() <= 1e-6);
    }

    CHECK_THROWS_WITH_AS(eval_reconstruction(g, w, -0.01), doctest::Contains("outside"),
                         std::runtime_error);
    CHECK_THROWS_AS(eval_reconstruction(g, w, 1.01), std::runtime_error);
    std::vector<Vec> short_w(w.begin(), w.end() - 1);
    CHECK_THROWS_AS(eval_reconstruction(g, short_w, 0.5), std::runtime_error);
    const TimeGrid one_step = timegrid_from_instants({0.0, 1.0});
    std::vector<Vec> two(w.begin(), w.begin() + 2);
    CHECK_THROWS_AS(eval_reconstruction(one_step, two, 0.5), std::runtime_error);
}

TEST_CASE("elliptic image of the second difference satisfies its defining system") {
    const Fixture fx;
    for (int k = 1; k < fx.traj.steps(); ++k) {
        const Vec z = compute_zh(fx.traj, *fx.s.solveM, fx.s.K, k);
        const Vec d2u = divided_diff2(fx.traj.grid, fx.traj.u, k);
        const Vec residual = fx.s.M.matrix * z - fx.s.K.matrix * d2u;
        CHECK(residual.lpNorm<Eigen::Infinity>() <=
              1e-12 * (fx.s.K.matrix * d2u).lpNorm<Eigen::Infinity>() + 1e-15);
    }
}

TEST_CASE("element residual weight: closed-form values on the reference triangle") {
    const Mesh one =
        finalize_mesh({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {Triangle{{0, 1, 2}}}, {1, 1, 1});
    const auto dofs = DofMap::all_nodes(one);

    // constant 1: h_K^2 * integral of 1 = 2 * (1/2) = 1
    CHECK(weighted_elem_l2_sq(one, dofs, Vec::Ones(3)) == doctest::Approx(1.0).epsilon(1e-14));
    // w = x + y (nodal values 0, 1, 1): integral of (x+y)^2 = 1/4
    Vec xy(3);
    xy << 0.0, 1.0, 1.0;
    CHECK(weighted_elem_l2_sq(one, dofs, xy) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gradient jump: hat function on the split square, zero for globals") {
    const Mesh square = finalize_mesh({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}},
                                      {Triangle{{0, 1, 2}}, Triangle{{0, 2, 3}}}, {1, 1, 1, 1});
    const auto dofs = DofMap::all_nodes(square);
    REQUIRE(square.interior_edges.size() == 1);

    // hat at the origin: gradients (-1,0) and (0,-1), normal jump sqrt(2)
    // along an edge of length sqrt(2) -> h_E * integral = sqrt2 * 2 sqrt2 = 4
    Vec hat = Vec::Zero(4);
    hat[0] = 1.0;
    const auto per_edge = jump_l2_sq(square, dofs, hat);
    REQUIRE(per_edge.size() == 1);
    CHECK(per_edge[0] == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(jump_l2_sq_total(square, dofs, hat) == doctest::Approx(4.0).epsilon(1e-13));

    // a globally linear field has no gradient jumps
    Vec lin(4);
    for (int i = 0; i < 4; ++i) lin[i] = 2.0 * square.nodes[i][0] + 3.0 * square.nodes[i][1] - 1.0;
    CHECK(jump_l2_sq_total(square, dofs, lin) <= 1e-24);
}

TEST_CASE("time estimator: weights, per-step consistency, total identity") {
    const Fixture fx;
    const Trajectory& traj = fx.traj;
    const TimeGrid& g = traj.grid;
    const int N = traj.steps();

    EstimatorConfig cfg;
    const EstimatorReport rep =
        compute_estimates(fx.s.mesh, *fx.s.dofs, traj, *fx.s.solveM, fx.s.K, cfg);
    REQUIRE(static_cast<int>(rep.eta_T_per_step.size()) == N);

    // manual recomputation of the indicator and the weights
    const auto indicator = [&](int k) {
        const Vec d2v = divided_diff2(g, traj.v, k);
        const Vec d2f = divided_diff2(g, traj.f, k);
        const Vec z = compute_zh(traj, *fx.s.solveM, fx.s.K, k);
        return seminorm_h1(fx.s.K, d2v) + norm_l2(fx.s.M, Vec(d2f - z));
    };
    CHECK(rep.eta_T_per_step[0] ==
          doctest::Approx((5.0 * g.tau(0) * g.tau(0) / 12.0 + g.tau(1) * g.tau(0) / 2.0) *
                          indicator(1))
              .epsilon(1e-13));
    for (int k = 1; k < N; ++k) {
        CAPTURE(k);
        const double expect =
            (g.tau(k) * g.tau(k) / 12.0 + g.tau(k - 1) * g.tau(k) / 8.0) * indicator(k);
        CHECK(rep.eta_T_per_step[k] == doctest::Approx(expect).epsilon(1e-13));
        CHECK(eta_T_step(traj, *fx.s.solveM, fx.s.K, k) ==
              doctest::Approx(rep.eta_T_per_step[k]).epsilon(1e-14));
    }
    CHECK(eta_T_step(traj, *fx.s.solveM, fx.s.K, 0) ==
          doctest::Approx(rep.eta_T_per_step[0]).epsilon(1e-14));

    double total = 0.0;
    for (int k = 0; k < N; ++k) total += g.tau(k) * rep.eta_T_per_step[k];
    CHECK(rep.eta_T_total == doctest::Approx(total).epsilon(1e-14));

    CHECK_THROWS_AS(eta_T_step(traj, *fx.s.solveM, fx.s.K, -1), std::runtime_error);
    CHECK_THROWS_AS(eta_T_step(traj, *fx.s.solveM, fx.s.K, N), std::runtime_error);
}

TEST_CASE("space estimators: match their definitions term by term") {
    const Fixture fx;
    const Trajectory& traj = fx.traj;
    const TimeGrid& g = traj.grid;
    const int N = traj.steps();

    EstimatorConfig cfg;
    const EstimatorReport rep =
        compute_estimates(fx.s.mesh, *fx.s.dofs, traj, *fx.s.solveM, fx.s.K, cfg);

    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int n = 1; n < N; ++n) {
        const Vec dv = divided_diff1(g, traj.v, n);
        s1 = std::max(s1, std::sqrt(weighted_elem_l2_sq(fx.s.mesh, *fx.s.dofs,
                                                        Vec(dv - traj.f[n])) +
                                    jump_l2_sq_total(fx.s.mesh, *fx.s.dofs, traj.u[n])));
        const Vec d2v = divided_diff2(g, traj.v, n);
        const Vec df = divided_diff1(g, traj.f, n);
        const Vec du = divided_diff1(g, traj.u, n);
        s2 += g.tau(n) *
              std::sqrt(weighted_elem_l2_sq(fx.s.mesh, *fx.s.dofs, Vec(d2v - df)) +
                        jump_l2_sq_total(fx.s.mesh, *fx.s.dofs, du));
    }
    for (int m = 2; m < N; ++m) {
        const Vec diff =
            Vec(divided_diff2(g, traj.v, m)) - Vec(divided_diff2(g, traj.v, m - 1));
        s3 += g.tau(m - 1) * std::sqrt(weighted_elem_l2_sq(fx.s.mesh, *fx.s.dofs, diff));
    }
    CHECK(rep.eta_S1 == doctest::Approx(s1).epsilon(1e-13));
    CHECK(rep.eta_S2 == doctest::Approx(s2).epsilon(1e-13));
    CHECK(rep.eta_S3 == doctest::Approx(s3).epsilon(1e-13));
    CHECK(rep.eta_S() == doctest::Approx(s1 + s2).epsilon(1e-13));

    // N0 against its definition
    REQUIRE(rep.N0.has_value());
    const Vec au0 = apply_Ah(*fx.s.solveM, fx.s.K, traj.u[0]);
    const double n0 =
        norm_l2(fx.s.M, apply_Ah(*fx.s.solveM, fx.s.K, Vec(au0 - traj.f[0])));
    CHECK(*rep.N0 == doctest::Approx(n0).epsilon(1e-12));
}

TEST_CASE("estimator configuration: weight scaling and optional N0") {
    const Fixture fx;
    EstimatorConfig plain;
    const EstimatorReport base =
        compute_estimates(fx.s.mesh, *fx.s.dofs, fx.traj, *fx.s.solveM, fx.s.K, plain);

    EstimatorConfig scaled;
    scaled.C1 = 2.0;
    scaled.C2 = 0.5;
    scaled.C3 = 3.0;
    scaled.include_N0 = false;
    const EstimatorReport rep =
        compute_estimates(fx.s.mesh, *fx.s.dofs, fx.traj, *fx.s.solveM, fx.s.K, scaled);

    // raw component values are weight-independent; only the combination and
    // the extra diagnostic scale
    CHECK(rep.eta_S1 == doctest::Approx(base.eta_S1).epsilon(1e-15));
    CHECK(rep.eta_S2 == doctest::Approx(base.eta_S2).epsilon(1e-15));
    CHECK(rep.eta_S() == doctest::Approx(2.0 * base.eta_S1 + 0.5 * base.eta_S2).epsilon(1e-14));
    CHECK(rep.eta_S3 == doctest::Approx(3.0 * base.eta_S3).epsilon(1e-14));
    CHECK(rep.eta_T_total == doctest::Approx(base.eta_T_total).epsilon(1e-15));
    CHECK(!rep.N0.has_value());
    CHECK(base.N0.has_value());
    // M1/M2/e/ei are the callers' fields, never set here
    CHECK(!rep.M1.has_value());
    CHECK(!rep.e.has_value());

    // a one-step trajectory cannot carry three-point differences
    Fixture tiny({0.0, 1.0});
    CHECK_THROWS_WITH_AS(
        compute_estimates(tiny.s.mesh, *tiny.s.dofs, tiny.traj, *tiny.s.solveM, tiny.s.K, plain),
        doctest::Contains("at least 2"), std::runtime_error);
}

TEST_CASE("stability diagnostics: definitions, layout, uniform-grid contract") {
    Fixture fx({0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
    const int dim = fx.s.dofs->dof_count();
    Vec l2p(dim);
    for (int i = 0; i < dim; ++i) l2p[i] = std::cos(0.5 * i) + 0.2;

    const StabilityDiagnostics d =
        compute_diagnostics(fx.traj, *fx.s.solveM, fx.s.K, l2p);
    const int N = fx.traj.steps();
    REQUIRE(static_cast<int>(d.Z.size()) == N - 2);

    const Vec au0 = apply_Ah(*fx.s.solveM, fx.s.K, fx.traj.u[0]);
    CHECK(d.N0 == doctest::Approx(norm_l2(fx.s.M, apply_Ah(*fx.s.solveM, fx.s.K,
                                                           Vec(au0 - fx.traj.f[0]))))
                      .epsilon(1e-12));
    CHECK(d.M1 ==
          doctest::Approx(norm_l2(fx.s.M, apply_Ah(*fx.s.solveM, fx.s.K, l2p))).epsilon(1e-12));
    CHECK(d.M2 == doctest::Approx(seminorm_h1(fx.s.K, l2p)).epsilon(1e-12));

    for (int n = 2; n < N; ++n) {
        const Vec d2f = divided_diff2(fx.traj.grid, fx.traj.f, n);
        const Vec d2u = divided_diff2(fx.traj.grid, fx.traj.u, n);
        const Vec d2v = divided_diff2(fx.traj.grid, fx.traj.v, n);
        const double l2 =
            norm_l2(fx.s.M, Vec(d2f - apply_Ah(*fx.s.solveM, fx.s.K, d2u)));
        const double h1 = seminorm_h1(fx.s.K, d2v);
        CHECK(d.Z[n - 2] == doctest::Approx(std::sqrt(l2 * l2 + h1 * h1)).epsilon(1e-12));
    }

    const Fixture skew;  // nonuniform instants
    CHECK_THROWS_WITH_AS(compute_diagnostics(skew.traj, *skew.s.solveM, skew.s.K, l2p),
                         doctest::Contains("uniform"), std::runtime_error);
}
