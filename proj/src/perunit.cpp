#include "mgmor/perunit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mgmor/error.hpp"

namespace mgmor {

PerUnitBase make_base(double u_base, double s_base, double f0) {
    if (!(u_base > 0.0) || !(s_base > 0.0) || !(f0 > 0.0)) {
        throw DomainError("per-unit base requires positive voltage, power and frequency (got u=" +
                          std::to_string(u_base) + ", s=" + std::to_string(s_base) +
                          ", f0=" + std::to_string(f0) + ")");
    }
    PerUnitBase b;
    b.u_base = u_base;
    b.s_base = s_base;
    b.w0 = 2.0 * std::numbers::pi * f0;
    b.z_base = 1.5 * u_base * u_base / s_base;
    b.i_base = s_base / (1.5 * u_base);
    return b;
}

ImpedancePu impedance_to_pu(double resistance_ohm, double inductance_h, const PerUnitBase& base) {
    if (resistance_ohm < 0.0 || inductance_h < 0.0) {
        throw DomainError("impedance must have non-negative R and L");
    }
    if (resistance_ohm == 0.0 && inductance_h == 0.0) {
        throw DomainError("degenerate branch: R and L are both zero");
    }
    return {resistance_ohm / base.z_base, base.w0 * inductance_h / base.z_base};
}

DroopGains normalize_droops(double mp_rad_per_watt, double nq_volt_per_var, double sn_va,
                            const PerUnitBase& base, double u0) {
    if (!(mp_rad_per_watt > 0.0) || !(nq_volt_per_var > 0.0) || !(sn_va > 0.0)) {
        throw DomainError("droop slopes and rating must be positive");
    }
    DroopGains g;
    g.mp = mp_rad_per_watt * base.s_base;
    g.nq = nq_volt_per_var * base.s_base / base.u_base;
    g.sn = sn_va / base.s_base;
    g.kp = g.mp * g.sn / base.w0;
    g.kq = g.nq * g.sn / u0;
    return g;
}

DroopGains gains_from_normalized(double kp, double kq, double sn_pu, double w0, double u0) {
    if (!(kp > 0.0) || !(kq > 0.0) || !(sn_pu > 0.0)) {
        throw DomainError("normalized gains and rating must be positive");
    }
    DroopGains g;
    g.kp = kp;
    g.kq = kq;
    g.sn = sn_pu;
    g.mp = kp * w0 / sn_pu;
    g.nq = kq * u0 / sn_pu;
    return g;
}

DroopGains scale_gains(const DroopGains& g, double kp_factor, double kq_factor, double w0,
                       double u0) {
    return gains_from_normalized(g.kp * kp_factor, g.kq * kq_factor, g.sn, w0, u0);
}

}  // namespace mgmor
