#include "napost/report.hpp"

#include <cstdio>

namespace napost {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_header() {
    return "case,h,tau_law,tau,N,data_mode,eta_T,eta_S1,eta_S2,eta_S,N0,M1,M2,e,ei";
}

namespace {

void append(std::string& line, const std::optional<double>& v) {
    line += ',';
    if (v) line += format_g17(*v);
}

}  // namespace

std::string csv_row(const CsvRow& row) {
    std::string line = row.case_id;
    append(line, row.h);
    line += ',';
    line += row.tau_law;
    append(line, row.tau);
    line += ',';
    if (row.N) line += std::to_string(*row.N);
    line += ',';
    line += row.data_mode;
    append(line, row.eta_T);
    append(line, row.eta_S1);
    append(line, row.eta_S2);
    append(line, row.eta_S);
    append(line, row.N0);
    append(line, row.M1);
    append(line, row.M2);
    append(line, row.e);
    append(line, row.ei);
    return line;
}

}  // namespace napost
