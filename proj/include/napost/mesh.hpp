#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace napost {

struct Triangle {
    std::array<int, 3> v;  // node indices, counter-clockwise
};

// An edge shared by exactly two triangles.
struct InteriorEdge {
    int a, b;          // node pair, a < b
    int left, right;   // adjacent triangle indices
};

// Conforming triangulation with the derived topology residual estimators
// need. Immutable after construction.
struct Mesh {
    std::vector<std::array<double, 2>> nodes;
    std::vector<Triangle> triangles;
    std::vector<std::uint8_t> node_is_boundary;
    std::vector<InteriorEdge> interior_edges;
    std::vector<double> area;  // positive per orientation invariant
    std::vector<double> h_K;   // longest edge per triangle
    std::vector<double> h_E;   // length per interior edge

    int node_count() const { return static_cast<int>(nodes.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
};

// n x n grid of the unit square, each cell split by the same diagonal
// direction; (n+1)^2 nodes, 2n^2 triangles.
Mesh generate_structured(int n);

// Derive areas, diameters and interior-edge topology from nodes/triangles/
// flags, validating conformity. Used by every mesh producer.
Mesh finalize_mesh(std::vector<std::array<double, 2>> nodes,
                   std::vector<Triangle> triangles,
                   std::vector<std::uint8_t> node_is_boundary);

// Line-oriented ASCII format; see README. Throws std::runtime_error with a
// distinct message per defect (malformed header, bad connectivity, inverted
// triangle, dangling node).
Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

// Displace interior nodes by a deterministic pseudo-random offset of at most
// `amplitude` times the shortest incident edge. Boundary nodes stay fixed;
// any displacement that would invert an incident triangle is halved until
// orientation is restored. amplitude must lie in [0, 0.3).
Mesh perturb_mesh(const Mesh& mesh, double amplitude, std::uint64_t seed);

// Strictly increasing time instants t_0 = 0 .. t_N = T; steps are always
// derived from the stored instants.
struct TimeGrid {
    std::vector<double> instants;

    int steps() const { return static_cast<int>(instants.size()) - 1; }
    double total_time() const { return instants.back(); }
    double tau(int n) const { return instants[n + 1] - instants[n]; }
    // tau_{n-1/2} = (tau_n + tau_{n-1}) / 2
    double tau_half(int n) const { return 0.5 * (tau(n) + tau(n - 1)); }
};

TimeGrid timegrid_from_instants(std::vector<double> instants);

// Uniform steps of size tau; the final step is truncated to land on T
// exactly (a step within 1e-9*T of T is snapped instead of truncated).
TimeGrid generate_uniform_timegrid(double tau, double T);

// Steps alternate ratio*tau_star (even n) and tau_star (odd n); final step
// truncated to land on T exactly. ratio must lie in (0, 1]; tau_star >= T is
// a degenerate-grid error.
TimeGrid generate_alternating_timegrid(double tau_star, double ratio, double T);

}  // namespace napost
