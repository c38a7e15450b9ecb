#pragma once

#include <cmath>

#include "mgmor/models.hpp"
#include "mgmor/perunit.hpp"
#include "mgmor/sim.hpp"

namespace testing {

inline mgmor::PerUnitBase table_base() { return mgmor::make_base(381.58, 1e4, 50.0); }

inline mgmor::DroopInverter table_inverter(const mgmor::PerUnitBase& b) {
    mgmor::DroopInverter inv;
    inv.node = "inv";
    inv.gains = mgmor::normalize_droops(9.3e-5, 1.3e-3, 1e4, b);
    inv.tau = 1.0 / 31.4;
    inv.w_set = b.w0;
    const auto c = mgmor::impedance_to_pu(0.03, 0.35e-3, b);
    inv.coupling = {"inv", "grid", c.r, c.x};
    return inv;
}

/// Inverter behind coupling plus `km` of line to an infinite bus.
inline mgmor::TwoBusParams twobus(double km, double kp_factor = 1.0, double kq_factor = 1.0) {
    const auto b = table_base();
    mgmor::TwoBusParams p;
    p.inverter = table_inverter(b);
    p.inverter.gains = mgmor::scale_gains(p.inverter.gains, kp_factor, kq_factor, b.w0);
    const auto c = mgmor::impedance_to_pu(0.03 + 0.165 * km, (0.35e-3 + 0.26e-3 * km), b);
    p.r = c.r;
    p.x = c.x;
    p.w0 = b.w0;
    return p;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing
