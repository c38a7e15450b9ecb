#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mgmor/models.hpp"

namespace mgmor {

// Scenario files use physical units (ohm, mH, kVA, km); conversion to per-unit
// happens once in to_microgrid.

struct ScenarioBase {
    double u_base = 381.58;  // V, peak phase
    double s_base = 1e4;     // VA
    double f0 = 50.0;        // Hz
};

struct ScenarioInverter {
    std::string name;  // terminal node; defaults to "inv_" + bus
    std::string bus;   // point of connection behind the coupling impedance
    double sn_kva = 10.0;
    double mp = 9.3e-5;  // rad/s/W
    double nq = 1.3e-3;  // V/VAr
    double wc = 31.4;    // rad/s
    double rc_ohm = 0.03;
    double lc_mh = 0.35;
};

struct ScenarioBranch {
    std::string from;
    std::string to;
    double r_ohm_per_km = 0.0;
    double l_mh_per_km = 0.0;
    double length_km = 1.0;
};

struct ScenarioLoad {
    std::string bus;
    double z_real_ohm = 0.0;
    double z_imag_ohm = 0.0;  // at f0
};

struct ScenarioStiffBus {
    std::string bus;
    double u_pu = 1.0;
};

struct ScenarioOptions {
    double virtual_resistance_pu = 1e4;
    double zero_tol = 1e-6;
    // Collapse load-free interior buses joining exactly two branches.
    bool merge_series = true;
};

struct Scenario {
    std::string name;
    ScenarioBase base;
    std::vector<ScenarioInverter> inverters;
    std::vector<ScenarioBranch> branches;
    std::vector<ScenarioLoad> loads;
    std::vector<ScenarioStiffBus> stiff_buses;
    ScenarioOptions options;
};

/// Parses a JSON scenario. Syntax errors cite line and column; unknown or
/// mistyped keys cite their JSON path. Throws ParseError.
Scenario parse_scenario(const std::string& text, const std::string& source = "<input>");

/// Bundled fixture by name, otherwise a file path.
Scenario load_scenario(const std::string& name_or_path);

std::string emit_scenario(const Scenario& sc);

std::vector<std::string> fixture_names();
/// JSON text of a bundled fixture; throws ParseError for unknown names.
std::string fixture_text(const std::string& name);

struct ScenarioOverrides {
    std::optional<double> line_length_km;  // every branch
    double rating_scale = 1.0;             // sn and slopes together, kp/kq unchanged
    double line_x_scale = 1.0;             // multiplies line inductance
};

Scenario apply_overrides(Scenario sc, const ScenarioOverrides& ov);

/// Per-unit microgrid. Zero-length branches merge their buses; series merging
/// follows options.merge_series.
Microgrid to_microgrid(const Scenario& sc);

/// Physical scenario describing the same microgrid (branches emitted as 1 km).
Scenario from_microgrid(const Microgrid& mg, const std::string& name = "");

FullModelOptions model_options(const Scenario& sc);

}  // namespace mgmor
