#pragma once

// Per-unit bases for a three-phase system described by peak phase voltage.
//
// Every module works in per-unit internally. Time stays in seconds, so a
// branch inductance appears as x / w0 (pu·s).

namespace mgmor {

struct PerUnitBase {
    double u_base = 1.0;  // V, peak phase-to-ground
    double s_base = 1.0;  // VA, three-phase apparent
    double w0 = 1.0;      // rad/s
    double z_base = 1.5;  // ohm, 1.5 * u_base^2 / s_base
    double i_base = 1.0 / 1.5;  // A, peak

    double impedance_to_pu(double ohm) const { return ohm / z_base; }
    double impedance_from_pu(double pu) const { return pu * z_base; }
    double power_to_pu(double va) const { return va / s_base; }
    double power_from_pu(double pu) const { return pu * s_base; }
    double voltage_to_pu(double volts) const { return volts / u_base; }
    double voltage_from_pu(double pu) const { return pu * u_base; }
    double current_to_pu(double amps) const { return amps / i_base; }
    double current_from_pu(double pu) const { return pu * i_base; }
};

PerUnitBase make_base(double u_base, double s_base, double f0);

struct ImpedancePu {
    double r = 0.0;  // pu
    double x = 0.0;  // pu at w0
};

/// Series R-L element in ohms and henries to per-unit resistance and reactance.
ImpedancePu impedance_to_pu(double resistance_ohm, double inductance_h, const PerUnitBase& base);

/// Droop settings of one inverter.
///
/// mp is in rad/s per pu power and nq in pu voltage per pu reactive power, both
/// on the system base. kp and kq are normalized to the inverter's own rating sn.
struct DroopGains {
    double kp = 0.0;
    double kq = 0.0;
    double mp = 0.0;
    double nq = 0.0;
    double sn = 1.0;  // pu of s_base
};

/// Physical droop slopes (rad/s/W, V/VAr) and rating (VA) to normalized gains.
DroopGains normalize_droops(double mp_rad_per_watt, double nq_volt_per_var, double sn_va,
                            const PerUnitBase& base, double u0 = 1.0);

/// Builds gains from normalized values. Inverse of the kp/kq definitions.
DroopGains gains_from_normalized(double kp, double kq, double sn_pu, double w0, double u0 = 1.0);

/// Same inverter with kp and kq multiplied; slopes follow.
DroopGains scale_gains(const DroopGains& g, double kp_factor, double kq_factor, double w0,
                       double u0 = 1.0);

}  // namespace mgmor
