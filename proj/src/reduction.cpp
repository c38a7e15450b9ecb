#include "mgmor/reduction.hpp"

#include <sstream>

#include "mgmor/error.hpp"

namespace mgmor {

namespace {

double smallest_singular_value(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    return sv.size() ? sv(sv.size() - 1) : 0.0;
}

void require_well_conditioned(const Eigen::MatrixXd& m, const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                              double max_condition, const char* what) {
    const double rc = lu.rcond();
    if (!(rc * max_condition > 1.0)) {
        std::ostringstream os;
        os << what << " is singular or ill-conditioned (rcond " << rc << ", smallest singular value "
           << smallest_singular_value(m) << ")";
        throw ReductionError(os.str());
    }
}

Eigen::MatrixXd take(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& rows,
                     const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(rows[i], cols[j]);
        }
    }
    return out;
}

void check_shapes(const PartitionedLinear& p) {
    const auto ns = p.a_ss.rows();
    const auto nf = p.a_ff.rows();
    if (p.a_ss.cols() != ns || p.a_ff.cols() != nf || p.a_sf.rows() != ns || p.a_sf.cols() != nf ||
        p.a_fs.rows() != nf || p.a_fs.cols() != ns || p.gamma.size() != nf) {
        throw ReductionError("partition blocks have inconsistent shapes");
    }
    if (nf == 0) throw ReductionError("partition has no fast states");
}

}  // namespace

PartitionedLinear partition(const Eigen::MatrixXd& scaled_a, const std::vector<Eigen::Index>& slow,
                            const std::vector<Eigen::Index>& fast, const Eigen::VectorXd& gamma) {
    if (scaled_a.rows() != scaled_a.cols()) throw ReductionError("state matrix is not square");
    if (static_cast<Eigen::Index>(slow.size() + fast.size()) != scaled_a.rows()) {
        throw ReductionError("slow and fast index sets do not cover the state");
    }
    std::vector<bool> seen(static_cast<std::size_t>(scaled_a.rows()), false);
    for (auto idx : slow) {
        if (idx < 0 || idx >= scaled_a.rows() || seen[static_cast<std::size_t>(idx)]) {
            throw ReductionError("invalid slow/fast index sets");
        }
        seen[static_cast<std::size_t>(idx)] = true;
    }
    for (auto idx : fast) {
        if (idx < 0 || idx >= scaled_a.rows() || seen[static_cast<std::size_t>(idx)]) {
            throw ReductionError("invalid slow/fast index sets");
        }
        seen[static_cast<std::size_t>(idx)] = true;
    }
    if (gamma.size() != static_cast<Eigen::Index>(fast.size())) {
        throw ReductionError("gamma length must equal the number of fast states");
    }
    PartitionedLinear p;
    p.slow = slow;
    p.fast = fast;
    p.gamma = gamma;
    p.a_ss = take(scaled_a, slow, slow);
    p.a_sf = take(scaled_a, slow, fast);
    p.a_fs = take(scaled_a, fast, slow);
    p.a_ff = take(scaled_a, fast, fast);
    return p;
}

PartitionedLinear partition_by_labels(const LinearStateSpace& sys) {
    if (sys.labels.size() != static_cast<std::size_t>(sys.a.rows())) {
        throw ReductionError("state labels do not match the state matrix");
    }
    std::vector<Eigen::Index> slow, fast;
    std::vector<double> taus;
    Eigen::MatrixXd scaled = sys.a;
    for (std::size_t i = 0; i < sys.labels.size(); ++i) {
        const auto& lab = sys.labels[i];
        const auto idx = static_cast<Eigen::Index>(i);
        if (lab.kind == StateKind::current_d || lab.kind == StateKind::current_q) {
            fast.push_back(idx);
            taus.push_back(lab.time_constant);
            if (lab.time_constant > 0.0) scaled.row(idx) *= lab.time_constant;
        } else {
            slow.push_back(idx);
        }
    }
    if (fast.empty()) throw ReductionError("model has no fast (branch current) states");
    return partition(scaled, slow, fast, Eigen::Map<Eigen::VectorXd>(taus.data(), static_cast<Eigen::Index>(taus.size())));
}

Eigen::MatrixXd reduce_zero_order(const PartitionedLinear& p, const ReductionOptions& opt) {
    check_shapes(p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.a_ff);
    require_well_conditioned(p.a_ff, lu, opt.max_condition, "fast block A_ff");
    return p.a_ss - p.a_sf * lu.solve(p.a_fs);
}

Eigen::MatrixXd reduce_first_order(const PartitionedLinear& p, const ReductionOptions& opt) {
    check_shapes(p);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(p.a_ff);
    require_well_conditioned(p.a_ff, lu, opt.max_condition, "fast block A_ff");
    const Eigen::MatrixXd h = lu.solve(p.a_fs);  // Aff^-1 Afs
    const Eigen::MatrixXd a0 = p.a_ss - p.a_sf * h;
    const Eigen::MatrixXd corr = p.a_sf * lu.solve(p.gamma.asDiagonal() * h);
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a0.rows(), a0.cols()) + corr;
    Eigen::PartialPivLU<Eigen::MatrixXd> mlu(m);
    require_well_conditioned(m, mlu, opt.max_condition, "first-order correction I + A_sf A_ff^-1 Gamma A_ff^-1 A_fs");
    return mlu.solve(a0);
}

LinearStateSpace reduce(const LinearStateSpace& full, int order, const ReductionOptions& opt) {
    if (order != 0 && order != 1) throw DomainError("reduction order must be 0 or 1");
    const auto p = partition_by_labels(full);
    LinearStateSpace out;
    out.a = order == 0 ? reduce_zero_order(p, opt) : reduce_first_order(p, opt);
    out.kind = order == 0 ? ModelKind::simple3 : ModelKind::hifi3;
    out.w0 = full.w0;
    std::vector<Eigen::Index> new_index(full.labels.size(), -1);
    for (std::size_t k = 0; k < p.slow.size(); ++k) {
        out.labels.push_back(full.labels[static_cast<std::size_t>(p.slow[k])]);
        new_index[static_cast<std::size_t>(p.slow[k])] = static_cast<Eigen::Index>(k);
    }
    if (full.operating_point.size() == full.a.rows()) {
        out.operating_point.resize(static_cast<Eigen::Index>(p.slow.size()));
        for (std::size_t k = 0; k < p.slow.size(); ++k) {
            out.operating_point(static_cast<Eigen::Index>(k)) = full.operating_point(p.slow[k]);
        }
    }
    for (auto tap : full.taps) {
        tap.theta = new_index[static_cast<std::size_t>(tap.theta)];
        tap.omega = new_index[static_cast<std::size_t>(tap.omega)];
        tap.voltage = new_index[static_cast<std::size_t>(tap.voltage)];
        out.taps.push_back(tap);
    }
    return out;
}

}  // namespace mgmor
