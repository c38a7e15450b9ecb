#include "mgmor/inverter.hpp"

#include "mgmor/error.hpp"

namespace mgmor {

void DroopInverter::validate() const {
    if (!(tau > 0.0)) throw DomainError("inverter '" + node + "': tau must be positive");
    if (!(coupling.x > 0.0)) {
        throw DomainError("inverter '" + node + "': coupling reactance must be positive");
    }
    if (coupling.r < 0.0) throw DomainError("inverter '" + node + "': negative coupling resistance");
    if (!(gains.kp > 0.0) || !(gains.kq > 0.0) || !(gains.mp > 0.0) || !(gains.nq > 0.0)) {
        throw DomainError("inverter '" + node + "': droop gains must be positive");
    }
}

Setpoints backsolve_setpoints(const DroopInverter& inv, double p0, double q0, double w0,
                              double u0) {
    return {w0 + inv.gains.mp * p0, u0 + inv.gains.nq * q0};
}

InverterBlock inverter_block(const DroopInverter& inv) {
    InverterBlock blk;
    const double rate = 1.0 / inv.tau;
    blk.a << 0.0, 1.0, 0.0,
             0.0, -rate, 0.0,
             0.0, 0.0, -rate;
    blk.b << 0.0, 0.0,
             -inv.gains.mp * rate, 0.0,
             0.0, -inv.gains.nq * rate;
    return blk;
}

Eigen::Vector3d inverter_rhs(const DroopInverter& inv, double w0, double omega, double u,
                             double p, double q) {
    return {omega - w0,
            (inv.w_set - omega - inv.gains.mp * p) / inv.tau,
            (inv.u_set - u - inv.gains.nq * q) / inv.tau};
}

}  // namespace mgmor
