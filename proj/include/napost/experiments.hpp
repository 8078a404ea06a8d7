#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "napost/estimators.hpp"
#include "napost/fem.hpp"
#include "napost/mesh.hpp"
#include "napost/newmark.hpp"

namespace napost {

// Closed-form solution of the wave problem u_tt - Laplacian u = f with
// homogeneous Dirichlet data on the unit square.
struct AnalyticField {
    std::function<double(double, double, double)> value;                 // u(x, y, t)
    std::function<std::array<double, 2>(double, double, double)> grad;   // spatial gradient
    std::function<double(double, double, double)> dt;                    // u_t
    std::function<double(double, double, double)> f;                     // u_tt - Laplacian u
};

// Standing waves u = cos(w t) sin(k pi x) sin(k pi y):
//   'a' smooth     (w = pi,     k = 1),
//   'b' oscillatory in space (w = pi/2, k = 10),
//   'c' oscillatory in time  (w = 15 pi, k = 1).
AnalyticField make_case(char case_id);

struct MeshSpec {
    enum class Kind { structured, file, perturbed };
    Kind kind = Kind::structured;
    int n = 0;                // structured / perturbed resolution
    double amplitude = 0.0;   // perturbed
    std::uint64_t seed = 0;   // perturbed
    std::string path;         // file
};

struct TimegridSpec {
    enum class Law { uniform, sqrt_h, equal_h, alternating };
    Law law = Law::uniform;
    double tau = 0.0;       // uniform
    double tau_star = 0.0;  // alternating
    double ratio = 1.0;     // alternating
    double T = 1.0;
};

struct CaseSpec {
    char case_id = 'a';
    MeshSpec mesh;
    TimegridSpec grid;
    DataMode data_mode = DataMode::nodal;
    EstimatorConfig estimator;
};

// Throws on contradictory configuration (unknown case, under-resolved case
// 'b' mesh, missing law parameters); callers classify these as usage errors.
void validate_spec(const CaseSpec& spec);

// Mesh per spec; *h_out receives the resolution used by the step-size laws
// (1/n for structured and perturbed meshes, max h_K for files).
Mesh build_mesh(const MeshSpec& spec, double* h_out);

// Grid per spec; h feeds the sqrt-h (tau ~ sqrt(h)) and equal-h (tau ~ h)
// laws, which round the step count up to hit T exactly.
TimeGrid build_timegrid(const TimegridSpec& spec, double h);

// Energy error sqrt(||v_h - u_t||_L2^2 + |u_h - u|_H1^2) at every grid
// instant, by the order-4 rule.
std::vector<double> energy_error_series(const Mesh& mesh, const DofMap& dofs,
                                        const Trajectory& traj, const AnalyticField& field);

struct ExperimentResult {
    EstimatorReport report;
    std::vector<double> energy_series;  // one entry per instant
    TimeGrid grid;
    double h = 0.0;
    double tau0 = 0.0;
    int steps = 0;
};

// Full pipeline: mesh, data, march, estimate, error. Failures carry the
// stage name. e (and ei when e >= 1e-14) and M1/M2 are filled from the
// analytic field.
ExperimentResult run_experiment(const CaseSpec& spec);
ExperimentResult run_experiment(const CaseSpec& spec, const AnalyticField& field);

struct DiagnoseResult {
    StabilityDiagnostics diagnostics;
    TimeGrid grid;
    double h = 0.0;
    double tau0 = 0.0;
    int steps = 0;
};

// March the case and evaluate the data-consistency numbers and stability
// sequence (uniform grids only).
DiagnoseResult run_diagnose(const CaseSpec& spec);

}  // namespace napost
