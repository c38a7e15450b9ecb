#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/analysis.hpp"
#include "mgmor/sim.hpp"

namespace mgmor {

/// Shortest text with 15 significant digits ("%.15g").
std::string format_number(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os, char sep = ',') : os_(os), sep_(sep) {}
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<double>& values);
    // Mixed row: numbers then trailing text fields.
    void row(const std::vector<double>& values, const std::vector<std::string>& text);

private:
    std::ostream& os_;
    char sep_;
};

/// Header `t,<label>...`, one row per stored time.
void write_trajectory(std::ostream& os, const Trajectory& tr);
/// Header `t,p_<inv>,q_<inv>,omega_<inv>,u_<inv>...`.
void write_outputs(std::ostream& os, const Trajectory& tr);
/// Header `re,im,kind`.
void write_eigenvalues(std::ostream& os, const EigenReport& rep, std::string_view kind);
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
/// Header `kp,kq,stable` with gains as fractions.
void write_grid(std::ostream& os, const StabilityBoundary& b);
/// Header `kp,kq`.
void write_boundary(std::ostream& os, const StabilityBoundary& b);

}  // namespace mgmor
