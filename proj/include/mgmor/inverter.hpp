#pragma once

#include <string>

#include <Eigen/Dense>

#include "mgmor/network.hpp"
#include "mgmor/perunit.hpp"

namespace mgmor {

/// Droop-controlled inverter seen from its terminal: angle, frequency and
/// voltage magnitude, driven by measured P and Q through first-order filters.
struct DroopInverter {
    std::string node;
    DroopGains gains;
    double tau = 1.0 / 31.4;  // s, power filter time constant
    double w_set = 0.0;       // rad/s, absolute
    double u_set = 1.0;       // pu
    Branch coupling;          // terminal node -> point of connection

    void validate() const;
};

struct Setpoints {
    double w_set = 0.0;
    double u_set = 1.0;
};

/// Setpoints that make (w0, u0, p0, q0) an exact equilibrium of the droop laws.
Setpoints backsolve_setpoints(const DroopInverter& inv, double p0, double q0, double w0,
                              double u0 = 1.0);

/// Local small-signal block in (d theta, d omega, d U) driven by (d P, d Q).
struct InverterBlock {
    Eigen::Matrix3d a;
    Eigen::Matrix<double, 3, 2> b;
};
InverterBlock inverter_block(const DroopInverter& inv);

/// Time derivatives of (theta, omega, U) with omega absolute and theta
/// measured in the frame rotating at w0.
Eigen::Vector3d inverter_rhs(const DroopInverter& inv, double w0, double omega, double u,
                             double p, double q);

}  // namespace mgmor
