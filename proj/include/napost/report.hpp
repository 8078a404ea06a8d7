#pragma once

#include <optional>
#include <string>

namespace napost {

// One summary row of the fixed CSV schema. Absent values print as empty
// cells; numbers print with 17 significant digits so doubles round-trip.
struct CsvRow {
    std::string case_id;              // "a" | "b" | "c" | "ode"
    std::optional<double> h;
    std::string tau_law;              // uniform | sqrt-h | equal-h | alternating
    std::optional<double> tau;        // first step
    std::optional<int> N;             // step count
    std::string data_mode;            // nodal | projection | empty
    std::optional<double> eta_T, eta_S1, eta_S2, eta_S;
    std::optional<double> N0, M1, M2, e, ei;
};

std::string csv_header();
std::string csv_row(const CsvRow& row);

// printf "%.17g", the shortest form that reproduces the double exactly.
std::string format_g17(double x);

}  // namespace napost
