#include "napost/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace napost {
namespace {

double signed_area(const std::array<double, 2>& a,
                   const std::array<double, 2>& b,
                   const std::array<double, 2>& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}

std::string describe(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

}  // namespace

Mesh finalize_mesh(std::vector<std::array<double, 2>> nodes,
                   std::vector<Triangle> triangles,
                   std::vector<std::uint8_t> node_is_boundary) {
    const int nn = static_cast<int>(nodes.size());
    const int nt = static_cast<int>(triangles.size());
    if (static_cast<int>(node_is_boundary.size()) != nn)
        throw std::runtime_error("mesh connectivity: " +
                                 std::to_string(node_is_boundary.size()) +
                                 " boundary flags for " + std::to_string(nn) + " nodes");
    if (nn < 3 || nt < 1)
        throw std::runtime_error("mesh connectivity: need at least 3 nodes and 1 triangle, got " +
                                 std::to_string(nn) + " nodes and " + std::to_string(nt) +
                                 " triangles");

    Mesh mesh;
    mesh.nodes = std::move(nodes);
    mesh.triangles = std::move(triangles);
    mesh.node_is_boundary = std::move(node_is_boundary);
    mesh.area.reserve(nt);
    mesh.h_K.reserve(nt);

    std::vector<bool> referenced(nn, false);
    // Directed edge -> owning triangle; a conforming oriented mesh sees every
    // directed edge at most once.
    std::map<std::pair<int, int>, int> directed;
    for (int t = 0; t < nt; ++t) {
        const auto& v = mesh.triangles[t].v;
        for (int c = 0; c < 3; ++c) {
            if (v[c] < 0 || v[c] >= nn)
                throw std::runtime_error("mesh connectivity: triangle " + std::to_string(t) +
                                         " references node " + std::to_string(v[c]) +
                                         " outside [0, " + std::to_string(nn) + ")");
            if (v[c] == v[(c + 1) % 3])
                throw std::runtime_error("mesh connectivity: triangle " + std::to_string(t) +
                                         " repeats node " + std::to_string(v[c]));
            referenced[v[c]] = true;
        }
        const double sa = signed_area(mesh.nodes[v[0]], mesh.nodes[v[1]], mesh.nodes[v[2]]);
        if (!(sa > 0.0))
            throw std::runtime_error("mesh triangle " + std::to_string(t) +
                                     " is inverted (signed area " + describe(sa) +
                                     "); list vertices counter-clockwise");
        mesh.area.push_back(sa);
        double hk = 0.0;
        for (int c = 0; c < 3; ++c)
            hk = std::max(hk, dist(mesh.nodes[v[c]], mesh.nodes[v[(c + 1) % 3]]));
        mesh.h_K.push_back(hk);
        for (int c = 0; c < 3; ++c) {
            const std::pair<int, int> e{v[c], v[(c + 1) % 3]};
            auto [it, inserted] = directed.emplace(e, t);
            if (!inserted)
                throw std::runtime_error("mesh connectivity: triangles " +
                                         std::to_string(it->second) + " and " + std::to_string(t) +
                                         " both traverse edge (" + std::to_string(e.first) + "," +
                                         std::to_string(e.second) +
                                         ") in the same direction; elements overlap or a third "
                                         "triangle meets the edge");
        }
    }
    for (int i = 0; i < nn; ++i)
        if (!referenced[i])
            throw std::runtime_error("mesh node " + std::to_string(i) +
                                     " is dangling (referenced by no triangle)");

    // Pair opposite directed edges into interior edges; sorted map keeps the
    // edge order deterministic.
    std::map<std::pair<int, int>, std::array<int, 2>> undirected;
    for (const auto& [e, t] : directed) {
        const int a = std::min(e.first, e.second), b = std::max(e.first, e.second);
        auto [it, inserted] = undirected.emplace(std::pair{a, b}, std::array<int, 2>{-1, -1});
        it->second[e.first == a ? 0 : 1] = t;  // slot 0 holds the a->b traversal
    }
    for (const auto& [e, tris] : undirected) {
        if (tris[0] < 0 || tris[1] < 0) continue;  // boundary edge
        mesh.interior_edges.push_back({e.first, e.second, tris[0], tris[1]});
        mesh.h_E.push_back(dist(mesh.nodes[e.first], mesh.nodes[e.second]));
    }
    return mesh;
}

Mesh generate_structured(int n) {
    if (n < 1)
        throw std::runtime_error("structured mesh: subdivision count must be >= 1, got " +
                                 std::to_string(n));
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::uint8_t> flags;
    nodes.reserve((n + 1) * (n + 1));
    flags.reserve((n + 1) * (n + 1));
    for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= n; ++ix) {
            nodes.push_back({double(ix) / n, double(iy) / n});
            flags.push_back(ix == 0 || ix == n || iy == 0 || iy == n ? 1 : 0);
        }
    auto id = [n](int ix, int iy) { return iy * (n + 1) + ix; };
    std::vector<Triangle> tris;
    tris.reserve(2 * n * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const int v00 = id(ix, iy), v10 = id(ix + 1, iy);
            const int v01 = id(ix, iy + 1), v11 = id(ix + 1, iy + 1);
            tris.push_back({{v00, v10, v11}});
            tris.push_back({{v00, v11, v01}});
        }
    return finalize_mesh(std::move(nodes), std::move(tris), std::move(flags));
}

namespace {

// Next line with comments ('#' to end of line) stripped and blanks skipped.
bool next_content_line(std::istream& in, std::string& line, int& lineno) {
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        if (raw.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        line = raw;
        return true;
    }
    return false;
}

[[noreturn]] void header_error(int lineno, const std::string& expected, const std::string& got) {
    throw std::runtime_error("mesh header (line " + std::to_string(lineno) + "): expected " +
                             expected + ", got '" + got + "'");
}

int read_count_line(std::istream& in, const std::string& keyword, int& lineno) {
    std::string line;
    if (!next_content_line(in, line, lineno))
        throw std::runtime_error("mesh header: unexpected end of input; expected '" + keyword +
                                 " <count>'");
    std::istringstream iss(line);
    std::string word;
    long long count = -1;
    std::string extra;
    if (!(iss >> word >> count) || word != keyword || count < 0 || (iss >> extra))
        header_error(lineno, "'" + keyword + " <count>'", line);
    return static_cast<int>(count);
}

}  // namespace

Mesh read_mesh(std::istream& in) {
    int lineno = 0;
    std::string line;

    const int nn = read_count_line(in, "nodes", lineno);
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::uint8_t> flags;
    nodes.reserve(nn);
    flags.reserve(nn);
    for (int i = 0; i < nn; ++i) {
        if (!next_content_line(in, line, lineno))
            throw std::runtime_error("mesh node " + std::to_string(i) +
                                     ": unexpected end of input; expected '<x> <y> <flag 0|1>'");
        std::istringstream iss(line);
        double x = 0, y = 0;
        int flag = -1;
        std::string extra;
        if (!(iss >> x >> y >> flag) || (flag != 0 && flag != 1) || (iss >> extra))
            throw std::runtime_error("mesh node " + std::to_string(i) + " (line " +
                                     std::to_string(lineno) +
                                     "): expected '<x> <y> <flag 0|1>', got '" + line + "'");
        nodes.push_back({x, y});
        flags.push_back(static_cast<std::uint8_t>(flag));
    }

    const int nt = read_count_line(in, "triangles", lineno);
    std::vector<Triangle> tris;
    tris.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        if (!next_content_line(in, line, lineno))
            throw std::runtime_error("mesh triangle " + std::to_string(i) +
                                     ": unexpected end of input; expected '<i> <j> <k>'");
        std::istringstream iss(line);
        int a = -1, b = -1, c = -1;
        std::string extra;
        if (!(iss >> a >> b >> c) || (iss >> extra))
            throw std::runtime_error("mesh triangle " + std::to_string(i) + " (line " +
                                     std::to_string(lineno) +
                                     "): expected three node indices, got '" + line + "'");
        tris.push_back({{a, b, c}});
    }
    if (next_content_line(in, line, lineno))
        throw std::runtime_error("mesh header (line " + std::to_string(lineno) +
                                 "): unexpected trailing content '" + line + "'");
    return finalize_mesh(std::move(nodes), std::move(tris), std::move(flags));
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");
    return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
    out << std::setprecision(17);
    out << "nodes " << mesh.node_count() << "\n";
    for (int i = 0; i < mesh.node_count(); ++i)
        out << mesh.nodes[i][0] << " " << mesh.nodes[i][1] << " "
            << int(mesh.node_is_boundary[i]) << "\n";
    out << "triangles " << mesh.triangle_count() << "\n";
    for (const auto& t : mesh.triangles)
        out << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
}

Mesh perturb_mesh(const Mesh& mesh, double amplitude, std::uint64_t seed) {
    if (!(amplitude >= 0.0 && amplitude < 0.3))
        throw std::runtime_error("perturb_mesh: amplitude must lie in [0, 0.3), got " +
                                 describe(amplitude));

    // Shortest incident edge per node, from the unperturbed mesh.
    std::vector<double> shortest(mesh.node_count(), std::numeric_limits<double>::infinity());
    std::vector<std::vector<int>> incident(mesh.node_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& v = mesh.triangles[t].v;
        for (int c = 0; c < 3; ++c) {
            const int a = v[c], b = v[(c + 1) % 3];
            const double d = dist(mesh.nodes[a], mesh.nodes[b]);
            shortest[a] = std::min(shortest[a], d);
            shortest[b] = std::min(shortest[b], d);
            incident[a].push_back(t);
        }
    }

    std::vector<std::array<double, 2>> nodes = mesh.nodes;
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };  // uniform [0,1)

    for (int i = 0; i < mesh.node_count(); ++i) {
        if (mesh.node_is_boundary[i]) continue;
        const double angle = 2.0 * M_PI * unit();
        double r = amplitude * shortest[i] * std::sqrt(unit());
        const double dx = std::cos(angle), dy = std::sin(angle);
        for (int attempt = 0; attempt < 60; ++attempt) {
            const std::array<double, 2> trial{mesh.nodes[i][0] + r * dx,
                                              mesh.nodes[i][1] + r * dy};
            nodes[i] = trial;
            bool ok = true;
            for (int t : incident[i]) {
                const auto& v = mesh.triangles[t].v;
                if (!(signed_area(nodes[v[0]], nodes[v[1]], nodes[v[2]]) > 0.0)) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
            nodes[i] = mesh.nodes[i];  // displacement inverted a triangle: halve and retry
            r *= 0.5;
        }
    }
    return finalize_mesh(std::move(nodes), mesh.triangles, mesh.node_is_boundary);
}

TimeGrid timegrid_from_instants(std::vector<double> instants) {
    if (instants.size() < 2)
        throw std::runtime_error("time grid: need at least two instants, got " +
                                 std::to_string(instants.size()));
    if (instants.front() != 0.0)
        throw std::runtime_error("time grid: first instant must be 0, got " +
                                 describe(instants.front()));
    for (std::size_t n = 1; n < instants.size(); ++n)
        if (!(instants[n] > instants[n - 1]))
            throw std::runtime_error("time grid: instants must increase strictly; t[" +
                                     std::to_string(n) + "] = " + describe(instants[n]) +
                                     " <= t[" + std::to_string(n - 1) + "] = " +
                                     describe(instants[n - 1]));
    return TimeGrid{std::move(instants)};
}

TimeGrid generate_uniform_timegrid(double tau, double T) {
    if (!(tau > 0.0) || !(T > 0.0))
        throw std::runtime_error("uniform time grid: need tau > 0 and T > 0, got tau = " +
                                 describe(tau) + ", T = " + describe(T));
    std::vector<double> t{0.0};
    for (int k = 1; k * tau < T * (1.0 - 1e-9); ++k) t.push_back(k * tau);
    t.push_back(T);  // final step truncated (or snapped) to land on T exactly
    return timegrid_from_instants(std::move(t));
}

TimeGrid generate_alternating_timegrid(double tau_star, double ratio, double T) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw std::runtime_error("alternating time grid: ratio must lie in (0, 1], got " +
                                 describe(ratio));
    if (!(tau_star > 0.0) || !(T > 0.0))
        throw std::runtime_error("alternating time grid: need tau_star > 0 and T > 0, got "
                                 "tau_star = " + describe(tau_star) + ", T = " + describe(T));
    if (tau_star >= T)
        throw std::runtime_error("alternating time grid is degenerate: tau_star = " +
                                 describe(tau_star) + " must be < T = " + describe(T));
    // Closed-form instants (no accumulation drift): pairs of steps
    // ratio*tau_star then tau_star, the small step first.
    std::vector<double> t{0.0};
    for (long long k = 1;; ++k) {
        const double pair_len = (1.0 + ratio) * tau_star;
        const double tk = double(k / 2) * pair_len + (k % 2 ? ratio * tau_star : 0.0);
        if (tk >= T * (1.0 - 1e-9)) break;
        t.push_back(tk);
    }
    t.push_back(T);
    return timegrid_from_instants(std::move(t));
}

}  // namespace napost
