#include "napost/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "napost/experiments.hpp"
#include "napost/ode.hpp"
#include "napost/report.hpp"

namespace napost {
namespace {

// Rejected requests (exit 2), as opposed to failures of the computation.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

long long parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) return parts;
        start = pos + 1;
    }
}

MeshSpec parse_mesh(const std::string& s) {
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
    MeshSpec m;
    if (kind == "structured") {
        m.kind = MeshSpec::Kind::structured;
        m.n = static_cast<int>(parse_int(rest, "mesh resolution"));
    } else if (kind == "perturbed") {
        const auto parts = split(rest, ',');
        if (parts.size() != 3)
            throw ConfigError("perturbed mesh spec needs perturbed:<n>,<amplitude>,<seed>, got '" +
                              s + "'");
        m.kind = MeshSpec::Kind::perturbed;
        m.n = static_cast<int>(parse_int(parts[0], "mesh resolution"));
        m.amplitude = parse_double(parts[1], "perturbation amplitude");
        m.seed = static_cast<std::uint64_t>(parse_int(parts[2], "perturbation seed"));
    } else if (kind == "file") {
        m.kind = MeshSpec::Kind::file;
        m.path = rest;
        if (!std::ifstream(m.path))
            throw ConfigError("cannot open mesh file '" + m.path + "'");
    } else {
        throw ConfigError("unknown mesh spec '" + s +
                          "'; expected structured:<n>, perturbed:<n>,<amplitude>,<seed> or "
                          "file:<path>");
    }
    return m;
}

std::string law_name(TimegridSpec::Law law) {
    switch (law) {
        case TimegridSpec::Law::uniform: return "uniform";
        case TimegridSpec::Law::sqrt_h: return "sqrt-h";
        case TimegridSpec::Law::equal_h: return "equal-h";
        case TimegridSpec::Law::alternating: return "alternating";
    }
    return "?";
}

TimegridSpec parse_law(const std::string& s, double T) {
    TimegridSpec g;
    g.T = T;
    if (s == "sqrt-h") {
        g.law = TimegridSpec::Law::sqrt_h;
    } else if (s == "equal-h") {
        g.law = TimegridSpec::Law::equal_h;
    } else if (s.rfind("uniform:", 0) == 0) {
        g.law = TimegridSpec::Law::uniform;
        g.tau = parse_double(s.substr(8), "step size");
    } else if (s.rfind("alternating:", 0) == 0) {
        const auto parts = split(s.substr(12), ',');
        if (parts.size() != 2)
            throw ConfigError("alternating law needs alternating:<tau_star>,<ratio>, got '" + s +
                              "'");
        g.law = TimegridSpec::Law::alternating;
        g.tau_star = parse_double(parts[0], "tau_star");
        g.ratio = parse_double(parts[1], "step ratio");
    } else {
        throw ConfigError("unknown step law '" + s +
                          "'; expected uniform:<tau>, sqrt-h, equal-h or "
                          "alternating:<tau_star>,<ratio>");
    }
    return g;
}

DataMode parse_data_mode(const std::string& s) {
    if (s == "nodal") return DataMode::nodal;
    if (s == "projection") return DataMode::projection;
    throw ConfigError("unknown data mode '" + s + "'; expected nodal or projection");
}

double checked(double v, const char* name) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("result ") + name +
                                 " is not finite; the computation lost stability");
    return v;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "' for writing");
    f << text;
}

// Options shared by the wave and diagnose subcommands.
struct FieldOptions {
    std::string case_id = "a";
    std::string mesh = "structured:20";
    std::string law = "sqrt-h";
    std::string data = "nodal";
    double T = 1.0;
    std::string out_path;
    std::string series_path;
};

struct WaveOptions : FieldOptions {
    double C1 = 1.0, C2 = 1.0, C3 = 1.0;
    bool skip_N0 = false;
};

struct OdeOptions {
    double A = 100.0;
    std::string law = "uniform:0.01";
    double T = 1.0;
    std::string out_path;
    std::string series_path;
};

CaseSpec build_spec(const FieldOptions& o) {
    CaseSpec spec;
    if (o.case_id.size() != 1)
        throw ConfigError("unknown case '" + o.case_id + "'; expected a, b or c");
    spec.case_id = o.case_id[0];
    spec.mesh = parse_mesh(o.mesh);
    spec.grid = parse_law(o.law, o.T);
    spec.data_mode = parse_data_mode(o.data);
    try {
        validate_spec(spec);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

int run_wave(const WaveOptions& o, std::ostream& out) {
    CaseSpec spec = build_spec(o);
    spec.estimator.C1 = o.C1;
    spec.estimator.C2 = o.C2;
    spec.estimator.C3 = o.C3;
    spec.estimator.include_N0 = !o.skip_N0;

    const ExperimentResult res = run_experiment(spec);

    CsvRow row;
    row.case_id = o.case_id;
    row.h = res.h;
    row.tau_law = law_name(spec.grid.law);
    row.tau = checked(res.tau0, "tau");
    row.N = res.steps;
    row.data_mode = o.data;
    row.eta_T = checked(res.report.eta_T_total, "eta_T");
    row.eta_S1 = checked(res.report.eta_S1, "eta_S1");
    row.eta_S2 = checked(res.report.eta_S2, "eta_S2");
    row.eta_S = checked(res.report.eta_S(), "eta_S");
    if (res.report.N0) row.N0 = checked(*res.report.N0, "N0");
    if (res.report.M1) row.M1 = checked(*res.report.M1, "M1");
    if (res.report.M2) row.M2 = checked(*res.report.M2, "M2");
    if (res.report.e) row.e = checked(*res.report.e, "e");
    if (res.report.ei) row.ei = checked(*res.report.ei, "ei");
    write_text(o.out_path, csv_header() + "\n" + csv_row(row) + "\n", out);

    if (!o.series_path.empty()) {
        std::string text = "t,eta_T_step,eta_T_cumulative,energy_error_running_max\n";
        double cumulative = 0.0, running = res.energy_series[0];
        for (int k = 0; k < res.steps; ++k) {
            cumulative += res.grid.tau(k) * res.report.eta_T_per_step[k];
            running = std::max(running, res.energy_series[k + 1]);
            text += format_g17(res.grid.instants[k]) + "," +
                    format_g17(res.report.eta_T_per_step[k]) + "," + format_g17(cumulative) +
                    "," + format_g17(running) + "\n";
        }
        write_text(o.series_path, text, out);
    }
    return 0;
}

int run_diagnose_cmd(const FieldOptions& o, std::ostream& out) {
    CaseSpec spec = build_spec(o);
    if (spec.grid.law == TimegridSpec::Law::alternating)
        throw ConfigError(
            "stability diagnostics need a uniform grid; use uniform:<tau>, sqrt-h or equal-h");

    const DiagnoseResult res = run_diagnose(spec);

    CsvRow row;
    row.case_id = o.case_id;
    row.h = res.h;
    row.tau_law = law_name(spec.grid.law);
    row.tau = checked(res.tau0, "tau");
    row.N = res.steps;
    row.data_mode = o.data;
    row.N0 = checked(res.diagnostics.N0, "N0");
    row.M1 = checked(res.diagnostics.M1, "M1");
    row.M2 = checked(res.diagnostics.M2, "M2");
    write_text(o.out_path, csv_header() + "\n" + csv_row(row) + "\n", out);

    if (!o.series_path.empty()) {
        std::string text = "t,Z\n";
        for (std::size_t j = 0; j < res.diagnostics.Z.size(); ++j)
            text += format_g17(res.grid.instants[j + 2]) + "," +
                    format_g17(res.diagnostics.Z[j]) + "\n";
        write_text(o.series_path, text, out);
    }
    return 0;
}

int run_ode(const OdeOptions& o, std::ostream& out) {
    if (!(o.A > 0.0)) throw ConfigError("A must be positive, got " + std::to_string(o.A));
    const TimegridSpec g = parse_law(o.law, o.T);
    if (g.law == TimegridSpec::Law::sqrt_h || g.law == TimegridSpec::Law::equal_h)
        throw ConfigError("the scalar lab has no mesh; use uniform:<tau> or "
                          "alternating:<tau_star>,<ratio>");

    std::vector<long double> instants =
        g.law == TimegridSpec::Law::uniform
            ? ode_uniform_instants((long double)g.tau, (long double)g.T)
            : ode_alternating_instants((long double)g.tau_star, (long double)g.ratio,
                                       (long double)g.T);

    OdeProblem prob;
    prob.A = (long double)o.A;
    prob.u0 = 1.0L;
    prob.v0 = 0.0L;
    prob.T = (long double)g.T;
    const OdeTrajectory traj = ode_run(prob, std::move(instants));
    const OdeEta eta = ode_eta_T(traj, prob.A);

    const long double root_a = std::sqrt(prob.A);
    auto exact_u = [root_a](long double t) { return std::cos(root_a * t); };
    auto exact_v = [root_a](long double t) { return -root_a * std::sin(root_a * t); };
    std::vector<long double> err(traj.t.size());
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        const long double du = traj.u[n] - exact_u(traj.t[n]);
        const long double dv = traj.v[n] - exact_v(traj.t[n]);
        err[n] = std::sqrt(dv * dv + prob.A * du * du);
    }
    const long double e = *std::max_element(err.begin(), err.end());

    CsvRow row;
    row.case_id = "ode";
    row.tau_law = law_name(g.law);
    row.tau = checked((double)traj.tau(0), "tau");
    row.N = traj.steps();
    row.eta_T = checked((double)eta.total, "eta_T");
    row.e = checked((double)e, "e");
    if (e >= 1e-14L) row.ei = checked((double)(eta.total / e), "ei");
    write_text(o.out_path, csv_header() + "\n" + csv_row(row) + "\n", out);

    if (!o.series_path.empty()) {
        std::string text = "t,eta_T_step,eta_T_cumulative,energy_error_running_max\n";
        long double cumulative = 0.0L, running = err[0];
        for (int k = 0; k < traj.steps(); ++k) {
            cumulative += traj.tau(k) * eta.per_step[k];
            running = std::max(running, err[k + 1]);
            text += format_g17((double)traj.t[k]) + "," + format_g17((double)eta.per_step[k]) +
                    "," + format_g17((double)cumulative) + "," + format_g17((double)running) +
                    "\n";
        }
        write_text(o.series_path, text, out);
    }
    return 0;
}

// Setup/input failures carry a stage tag; the mesh and grid stages reject the
// request, everything later is a failure of the computation.
int classify_run_error(const std::string& message) {
    return message.rfind("[mesh]", 0) == 0 || message.rfind("[grid]", 0) == 0 ? 2 : 1;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Residual-based a posteriori estimates for the linear wave equation"};
    app.name("newmark-apost");

    WaveOptions wave;
    CLI::App* wave_cmd = app.add_subcommand(
        "wave", "Solve a wave case and report its error estimates");
    wave_cmd->add_option("--case", wave.case_id, "analytic case: a, b or c");
    wave_cmd->add_option("--mesh", wave.mesh,
                         "structured:<n> | perturbed:<n>,<amplitude>,<seed> | file:<path>");
    wave_cmd->add_option("--tau-law", wave.law,
                         "uniform:<tau> | sqrt-h | equal-h | alternating:<tau_star>,<ratio>");
    wave_cmd->add_option("--data", wave.data, "initial data and forcing: nodal | projection");
    wave_cmd->add_option("--T", wave.T, "time horizon");
    wave_cmd->add_option("--C1", wave.C1, "weight of the maximum space residual");
    wave_cmd->add_option("--C2", wave.C2, "weight of the accumulated space residual");
    wave_cmd->add_option("--C3", wave.C3, "weight of the extra-diagnostic term");
    wave_cmd->add_flag("--skip-N0", wave.skip_N0, "omit the data-consistency number N0");
    wave_cmd->add_option("--out", wave.out_path, "write the CSV summary here (default stdout)");
    wave_cmd->add_option("--emit-series", wave.series_path, "write the per-step series here");

    OdeOptions ode;
    CLI::App* ode_cmd =
        app.add_subcommand("ode", "Run the scalar lab u'' + A u = 0, u(0)=1, u'(0)=0");
    ode_cmd->add_option("--A", ode.A, "stiffness coefficient (positive)");
    ode_cmd->add_option("--tau-law", ode.law,
                        "uniform:<tau> | alternating:<tau_star>,<ratio>");
    ode_cmd->add_option("--T", ode.T, "time horizon");
    ode_cmd->add_option("--out", ode.out_path, "write the CSV summary here (default stdout)");
    ode_cmd->add_option("--emit-series", ode.series_path, "write the per-step series here");

    FieldOptions diag;
    CLI::App* diag_cmd = app.add_subcommand(
        "diagnose", "Report data-consistency numbers and the stability sequence");
    diag_cmd->add_option("--case", diag.case_id, "analytic case: a, b or c");
    diag_cmd->add_option("--mesh", diag.mesh,
                         "structured:<n> | perturbed:<n>,<amplitude>,<seed> | file:<path>");
    diag_cmd->add_option("--tau-law", diag.law, "uniform:<tau> | sqrt-h | equal-h");
    diag_cmd->add_option("--data", diag.data, "initial data and forcing: nodal | projection");
    diag_cmd->add_option("--T", diag.T, "time horizon");
    diag_cmd->add_option("--out", diag.out_path, "write the CSV summary here (default stdout)");
    diag_cmd->add_option("--emit-series", diag.series_path,
                         "write the stability sequence here");

    app.require_subcommand(1);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (wave_cmd->parsed()) return run_wave(wave, out);
        if (ode_cmd->parsed()) return run_ode(ode, out);
        return run_diagnose_cmd(diag, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        const int code = classify_run_error(e.what());
        err << "error: " << e.what() << "\n";
        return code;
    }
}

}  // namespace napost
