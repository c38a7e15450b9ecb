#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mgmor/models.hpp"

namespace mgmor {

/// Linear system split into slow states s and fast states f:
///   ds/dt = a_ss s + a_sf f,   Gamma df/dt = a_fs s + a_ff f.
/// gamma is diagonal (the fast time constants); a zero entry makes the row
/// purely algebraic.
struct PartitionedLinear {
    Eigen::MatrixXd a_ss, a_sf, a_fs, a_ff;
    Eigen::VectorXd gamma;
    std::vector<Eigen::Index> slow;
    std::vector<Eigen::Index> fast;
};

/// Slow/fast split of a labelled state space: inverter states are slow,
/// branch currents fast. Fast rows are multiplied by their time constant.
PartitionedLinear partition_by_labels(const LinearStateSpace& sys);

/// Split with explicit index sets and fast time constants (A rows already in
/// the Gamma-scaled form).
PartitionedLinear partition(const Eigen::MatrixXd& scaled_a, const std::vector<Eigen::Index>& slow,
                            const std::vector<Eigen::Index>& fast, const Eigen::VectorXd& gamma);

struct ReductionOptions {
    double max_condition = 1e12;
};

/// Quasi-stationary elimination of the fast states.
Eigen::MatrixXd reduce_zero_order(const PartitionedLinear& p, const ReductionOptions& opt = {});

/// Zero-order operator corrected by the first-order term of the fast
/// manifold expansion in Gamma.
Eigen::MatrixXd reduce_first_order(const PartitionedLinear& p, const ReductionOptions& opt = {});

/// Reduced slow model as a LinearStateSpace carrying the slow labels and taps.
LinearStateSpace reduce(const LinearStateSpace& full, int order, const ReductionOptions& opt = {});

}  // namespace mgmor
