#include "napost/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "napost/parallel.hpp"

namespace napost {
namespace {

[[noreturn]] void rethrow_tagged(const char* stage, const std::exception& e) {
    throw std::runtime_error(std::string("[") + stage + "] " + e.what());
}

}  // namespace

AnalyticField make_case(char case_id) {
    double w = 0.0, k = 0.0;
    switch (case_id) {
        case 'a': w = M_PI, k = 1.0; break;
        case 'b': w = 0.5 * M_PI, k = 10.0; break;
        case 'c': w = 15.0 * M_PI, k = 1.0; break;
        default:
            throw std::runtime_error(std::string("unknown case '") + case_id +
                                     "'; expected a, b or c");
    }
    const double kp = k * M_PI;
    AnalyticField field;
    field.value = [w, kp](double x, double y, double t) {
        return std::cos(w * t) * std::sin(kp * x) * std::sin(kp * y);
    };
    field.grad = [w, kp](double x, double y, double t) {
        const double c = std::cos(w * t);
        return std::array<double, 2>{c * kp * std::cos(kp * x) * std::sin(kp * y),
                                     c * kp * std::sin(kp * x) * std::cos(kp * y)};
    };
    field.dt = [w, kp](double x, double y, double t) {
        return -w * std::sin(w * t) * std::sin(kp * x) * std::sin(kp * y);
    };
    field.f = [w, kp](double x, double y, double t) {
        return (2.0 * kp * kp - w * w) * std::cos(w * t) * std::sin(kp * x) * std::sin(kp * y);
    };
    return field;
}

void validate_spec(const CaseSpec& spec) {
    if (spec.case_id != 'a' && spec.case_id != 'b' && spec.case_id != 'c')
        throw std::runtime_error(std::string("unknown case '") + spec.case_id +
                                 "'; expected a, b or c");
    switch (spec.mesh.kind) {
        case MeshSpec::Kind::structured:
        case MeshSpec::Kind::perturbed:
            if (spec.mesh.n < 1)
                throw std::runtime_error("mesh resolution must be >= 1, got " +
                                         std::to_string(spec.mesh.n));
            if (spec.case_id == 'b' && spec.mesh.n < 320)
                throw std::runtime_error(
                    "case 'b' oscillates at wavenumber 10 and needs a structured resolution of "
                    "at least 320, got " + std::to_string(spec.mesh.n));
            if (spec.mesh.kind == MeshSpec::Kind::perturbed &&
                !(spec.mesh.amplitude >= 0.0 && spec.mesh.amplitude < 0.3))
                throw std::runtime_error("perturbation amplitude must lie in [0, 0.3), got " +
                                         std::to_string(spec.mesh.amplitude));
            break;
        case MeshSpec::Kind::file:
            if (spec.mesh.path.empty())
                throw std::runtime_error("mesh file path is empty");
            break;
    }
    if (!(spec.grid.T > 0.0))
        throw std::runtime_error("time horizon T must be positive, got " +
                                 std::to_string(spec.grid.T));
    switch (spec.grid.law) {
        case TimegridSpec::Law::uniform:
            if (!(spec.grid.tau > 0.0))
                throw std::runtime_error("uniform step law needs tau > 0, got " +
                                         std::to_string(spec.grid.tau));
            break;
        case TimegridSpec::Law::alternating:
            if (!(spec.grid.tau_star > 0.0))
                throw std::runtime_error("alternating step law needs tau_star > 0, got " +
                                         std::to_string(spec.grid.tau_star));
            if (!(spec.grid.ratio > 0.0 && spec.grid.ratio <= 1.0))
                throw std::runtime_error("alternating step ratio must lie in (0, 1], got " +
                                         std::to_string(spec.grid.ratio));
            break;
        case TimegridSpec::Law::sqrt_h:
        case TimegridSpec::Law::equal_h:
            break;  // derived from the mesh resolution
    }
}

Mesh build_mesh(const MeshSpec& spec, double* h_out) {
    Mesh mesh;
    double h = 0.0;
    switch (spec.kind) {
        case MeshSpec::Kind::structured:
            mesh = generate_structured(spec.n);
            h = 1.0 / spec.n;
            break;
        case MeshSpec::Kind::perturbed:
            mesh = perturb_mesh(generate_structured(spec.n), spec.amplitude, spec.seed);
            h = 1.0 / spec.n;
            break;
        case MeshSpec::Kind::file:
            mesh = read_mesh_file(spec.path);
            h = *std::max_element(mesh.h_K.begin(), mesh.h_K.end());
            break;
    }
    if (h_out) *h_out = h;
    return mesh;
}

TimeGrid build_timegrid(const TimegridSpec& spec, double h) {
    switch (spec.law) {
        case TimegridSpec::Law::uniform:
            return generate_uniform_timegrid(spec.tau, spec.T);
        case TimegridSpec::Law::sqrt_h: {
            const int N = static_cast<int>(std::ceil(spec.T / std::sqrt(h) - 1e-12));
            return generate_uniform_timegrid(spec.T / N, spec.T);
        }
        case TimegridSpec::Law::equal_h: {
            const int N = static_cast<int>(std::ceil(spec.T / h - 1e-12));
            return generate_uniform_timegrid(spec.T / N, spec.T);
        }
        case TimegridSpec::Law::alternating:
            return generate_alternating_timegrid(spec.tau_star, spec.ratio, spec.T);
    }
    throw std::runtime_error("unhandled step law");
}

std::vector<double> energy_error_series(const Mesh& mesh, const DofMap& dofs,
                                        const Trajectory& traj, const AnalyticField& field) {
    const QuadRule& q = quadrature_order4();
    std::vector<double> out(traj.steps() + 1);
    for (int n = 0; n <= traj.steps(); ++n) {
        const double t = traj.grid.instants[n];
        const Vec& u = traj.u[n];
        const Vec& v = traj.v[n];
        const double sq = parallel_sum(mesh.triangle_count(), [&](std::size_t tri) {
            const auto& vtx = mesh.triangles[tri].v;
            const auto& p0 = mesh.nodes[vtx[0]];
            const auto& p1 = mesh.nodes[vtx[1]];
            const auto& p2 = mesh.nodes[vtx[2]];
            const auto grad = barycentric_gradients(mesh, static_cast<int>(tri));
            double ux = 0.0, uy = 0.0;
            std::array<double, 3> vv;
            for (int c = 0; c < 3; ++c) {
                const double uc = node_value(dofs, u, vtx[c]);
                ux += uc * grad[c][0];
                uy += uc * grad[c][1];
                vv[c] = node_value(dofs, v, vtx[c]);
            }
            double acc = 0.0;
            for (int k = 0; k < QuadRule::npts; ++k) {
                const auto& l = q.bary[k];
                const double x = l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0];
                const double y = l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1];
                const double dv = l[0] * vv[0] + l[1] * vv[1] + l[2] * vv[2] - field.dt(x, y, t);
                const auto dg = field.grad(x, y, t);
                const double ex = ux - dg[0], ey = uy - dg[1];
                acc += q.weight[k] * (dv * dv + ex * ex + ey * ey);
            }
            return mesh.area[tri] * acc;
        });
        out[n] = std::sqrt(std::max(0.0, sq));
    }
    return out;
}

namespace {

struct Prepared {
    Mesh mesh;
    std::shared_ptr<const DofMap> dofs;
    SparseOperator stiffness;
    std::unique_ptr<SpdSolver> mass_solver;
    Trajectory traj;
    Vec l2_proj_u0;
    double h = 0.0;
};

Prepared prepare(const CaseSpec& spec, const AnalyticField& field) {
    validate_spec(spec);
    Prepared p;
    try {
        p.mesh = build_mesh(spec.mesh, &p.h);
        p.dofs = std::make_shared<const DofMap>(DofMap::interior(p.mesh));
        if (p.dofs->dof_count() == 0)
            throw std::runtime_error(
                "mesh has no interior nodes, so the homogeneous Dirichlet problem has an "
                "empty discrete space; refine the mesh");
    } catch (const std::exception& e) {
        rethrow_tagged("mesh", e);
    }
    TimeGrid grid;
    try {
        grid = build_timegrid(spec.grid, p.h);
    } catch (const std::exception& e) {
        rethrow_tagged("grid", e);
    }

    Vec u0, v0;
    std::vector<Vec> fs(grid.steps() + 1);
    try {
        p.stiffness = assemble_stiffness(p.mesh, *p.dofs);
        p.mass_solver = std::make_unique<SpdSolver>(assemble_mass(p.mesh, *p.dofs));

        auto value_at = [&field](double t) {
            return SpatialFn([&field, t](double x, double y) { return field.value(x, y, t); });
        };
        auto dt_at = [&field](double t) {
            return SpatialFn([&field, t](double x, double y) { return field.dt(x, y, t); });
        };
        auto f_at = [&field](double t) {
            return SpatialFn([&field, t](double x, double y) { return field.f(x, y, t); });
        };

        if (spec.data_mode == DataMode::nodal) {
            u0 = nodal_interpolate(p.mesh, p.dofs, value_at(0.0)).coeffs;
            v0 = nodal_interpolate(p.mesh, p.dofs, dt_at(0.0)).coeffs;
            for (int n = 0; n <= grid.steps(); ++n)
                fs[n] = nodal_interpolate(p.mesh, p.dofs, f_at(grid.instants[n])).coeffs;
        } else {
            const SpdSolver stiff_solver(p.stiffness);
            auto grad_at_0 = SpatialGradFn(
                [&field](double x, double y) { return field.grad(x, y, 0.0); });
            u0 = h1_project(p.mesh, p.dofs, grad_at_0, stiff_solver).coeffs;
            v0 = l2_project(p.mesh, p.dofs, dt_at(0.0), *p.mass_solver).coeffs;
            for (int n = 0; n <= grid.steps(); ++n)
                fs[n] = l2_project(p.mesh, p.dofs, f_at(grid.instants[n]), *p.mass_solver).coeffs;
        }
        p.l2_proj_u0 = l2_project(p.mesh, p.dofs, value_at(0.0), *p.mass_solver).coeffs;
    } catch (const std::exception& e) {
        rethrow_tagged("data", e);
    }

    try {
        p.traj = newmark_run(p.mass_solver->op(), p.stiffness, grid, u0, v0, std::move(fs));
    } catch (const std::exception& e) {
        rethrow_tagged("march", e);
    }
    return p;
}

}  // namespace

ExperimentResult run_experiment(const CaseSpec& spec, const AnalyticField& field) {
    Prepared p = prepare(spec, field);
    ExperimentResult r;
    r.grid = p.traj.grid;
    r.h = p.h;
    r.tau0 = r.grid.tau(0);
    r.steps = r.grid.steps();
    try {
        r.report = compute_estimates(p.mesh, *p.dofs, p.traj, *p.mass_solver, p.stiffness,
                                     spec.estimator);
    } catch (const std::exception& e) {
        rethrow_tagged("estimate", e);
    }
    r.report.M1 = norm_l2(p.mass_solver->op(),
                          apply_Ah(*p.mass_solver, p.stiffness, p.l2_proj_u0));
    r.report.M2 = seminorm_h1(p.stiffness, p.l2_proj_u0);
    try {
        r.energy_series = energy_error_series(p.mesh, *p.dofs, p.traj, field);
    } catch (const std::exception& e) {
        rethrow_tagged("error", e);
    }
    const double e = *std::max_element(r.energy_series.begin(), r.energy_series.end());
    r.report.e = e;
    if (e >= 1e-14)
        r.report.ei = (r.report.eta_T_total + r.report.eta_S()) / e;
    return r;
}

ExperimentResult run_experiment(const CaseSpec& spec) {
    return run_experiment(spec, make_case(spec.case_id));
}

DiagnoseResult run_diagnose(const CaseSpec& spec) {
    Prepared p = prepare(spec, make_case(spec.case_id));
    DiagnoseResult r;
    r.grid = p.traj.grid;
    r.h = p.h;
    r.tau0 = r.grid.tau(0);
    r.steps = r.grid.steps();
    try {
        r.diagnostics = compute_diagnostics(p.traj, *p.mass_solver, p.stiffness, p.l2_proj_u0);
    } catch (const std::exception& e) {
        rethrow_tagged("estimate", e);
    }
    return r;
}

}  // namespace napost
