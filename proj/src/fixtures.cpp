#include <string>
#include <vector>

#include "mgmor/error.hpp"
#include "mgmor/scenario.hpp"

namespace mgmor {

namespace {

// Five identical 10 kVA inverters in a radial cascade.
constexpr const char* table1_cascade = R"({
  "name": "table1_cascade",
  "base": {"u_base": 381.58, "s_base": 10000, "f0": 50},
  "inverters": [
    {"name": "inv1", "bus": "bus1", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35},
    {"name": "inv2", "bus": "bus2", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35},
    {"name": "inv3", "bus": "bus3", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35},
    {"name": "inv4", "bus": "bus4", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35},
    {"name": "inv5", "bus": "bus5", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35}
  ],
  "branches": [
    {"from": "bus1", "to": "bus2", "r_ohm_per_km": 0.165, "l_mh_per_km": 0.26, "length_km": 5},
    {"from": "bus2", "to": "bus3", "r_ohm_per_km": 0.165, "l_mh_per_km": 0.26, "length_km": 4.1},
    {"from": "bus3", "to": "bus4", "r_ohm_per_km": 0.165, "l_mh_per_km": 0.26, "length_km": 3},
    {"from": "bus4", "to": "bus5", "r_ohm_per_km": 0.165, "l_mh_per_km": 0.26, "length_km": 6}
  ],
  "loads": [
    {"bus": "bus1", "z_real_ohm": 25, "z_imag_ohm": 0},
    {"bus": "bus2", "z_real_ohm": 20, "z_imag_ohm": 0},
    {"bus": "bus3", "z_real_ohm": 20, "z_imag_ohm": 4.72},
    {"bus": "bus4", "z_real_ohm": 40, "z_imag_ohm": 12.58},
    {"bus": "bus5", "z_real_ohm": 18.4, "z_imag_ohm": 0.157}
  ],
  "options": {"virtual_resistance_pu": 1e4, "zero_tol": 1e-6}
}
)";

// One 10 kVA inverter feeding an infinite bus through a 1 km line.
constexpr const char* twobus = R"({
  "name": "twobus",
  "base": {"u_base": 381.58, "s_base": 10000, "f0": 50},
  "inverters": [
    {"name": "inv", "bus": "pcc", "sn_kva": 10, "mp": 9.3e-5, "nq": 1.3e-3, "wc": 31.4, "rc_ohm": 0.03, "lc_mh": 0.35}
  ],
  "branches": [
    {"from": "pcc", "to": "grid", "r_ohm_per_km": 0.165, "l_mh_per_km": 0.26, "length_km": 1}
  ],
  "stiff_buses": [{"bus": "grid", "u_pu": 1.0}],
  "options": {"virtual_resistance_pu": 1e4, "zero_tol": 1e-6}
}
)";

}  // namespace

std::vector<std::string> fixture_names() { return {"table1_cascade", "twobus"}; }

std::string fixture_text(const std::string& name) {
    if (name == "table1_cascade") return table1_cascade;
    if (name == "twobus") return twobus;
    throw ParseError("unknown fixture '" + name + "'");
}

}  // namespace mgmor
