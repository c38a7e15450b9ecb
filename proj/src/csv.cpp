#include "mgmor/csv.hpp"

#include <cstdio>

namespace mgmor {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void CsvWriter::header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) os_ << sep_;
        os_ << cols[i];
    }
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row(values, {}); }

void CsvWriter::row(const std::vector<double>& values, const std::vector<std::string>& text) {
    bool first = true;
    for (double v : values) {
        if (!first) os_ << sep_;
        os_ << format_number(v);
        first = false;
    }
    for (const auto& s : text) {
        if (!first) os_ << sep_;
        os_ << s;
        first = false;
    }
    os_ << '\n';
}

void write_trajectory(std::ostream& os, const Trajectory& tr) {
    CsvWriter w(os);
    std::vector<std::string> cols{"t"};
    for (const auto& l : tr.labels) cols.push_back(l.name());
    w.header(cols);
    std::vector<double> row;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        row.assign(1, tr.t[k]);
        for (Eigen::Index j = 0; j < tr.states.cols(); ++j) row.push_back(tr.states(static_cast<Eigen::Index>(k), j));
        w.row(row);
    }
}

void write_outputs(std::ostream& os, const Trajectory& tr) {
    CsvWriter w(os);
    std::vector<std::string> cols{"t"};
    for (const auto& inv : tr.inverters) {
        for (const char* q : {"p_", "q_", "omega_", "u_"}) cols.push_back(q + inv);
    }
    w.header(cols);
    std::vector<double> row;
    for (std::size_t k = 0; k < tr.t.size() && static_cast<Eigen::Index>(k) < tr.p.rows(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        row.assign(1, tr.t[k]);
        for (Eigen::Index i = 0; i < tr.p.cols(); ++i) {
            row.push_back(tr.p(r, i));
            row.push_back(tr.q(r, i));
            row.push_back(tr.omega(r, i));
            row.push_back(tr.u(r, i));
        }
        w.row(row);
    }
}

void write_eigenvalues(std::ostream& os, const EigenReport& rep, std::string_view kind) {
    CsvWriter w(os);
    w.header({"re", "im", "kind"});
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
        w.row({rep.eigenvalues(i).real(), rep.eigenvalues(i).imag()}, {std::string(kind)});
    }
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    CsvWriter w(os);
    std::vector<double> row;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        row.clear();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        w.row(row);
    }
}

void write_grid(std::ostream& os, const StabilityBoundary& b) {
    CsvWriter w(os);
    w.header({"kp", "kq", "stable"});
    for (std::size_t r = 0; r < b.kq.size(); ++r) {
        for (std::size_t c = 0; c < b.kp.size(); ++c) {
            w.row({b.kp[c], b.kq[r], b.stable_at(r, c) ? 1.0 : 0.0});
        }
    }
}

void write_boundary(std::ostream& os, const StabilityBoundary& b) {
    CsvWriter w(os);
    w.header({"kp", "kq"});
    for (const auto& [kp, kq] : b.boundary) w.row({kp, kq});
}

}  // namespace mgmor
