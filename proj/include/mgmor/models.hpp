#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/inverter.hpp"
#include "mgmor/network.hpp"

namespace mgmor {

enum class ModelKind { full, simple3, hifi3 };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

enum class StateKind { angle, frequency, voltage, current_d, current_q };

std::string_view to_string(StateKind kind);

struct StateLabel {
    StateKind kind = StateKind::angle;
    std::string owner;
    // Physical time constant multiplying the state's derivative (branch
    // inductance for currents, filter tau for frequency/voltage, 0 otherwise).
    double time_constant = 0.0;

    std::string name() const;
};

/// Where an inverter's states live in a state vector, plus what is needed to
/// recover its measured P and Q from the droop laws.
struct InverterTap {
    std::string node;
    Eigen::Index theta = 0;
    Eigen::Index omega = 0;  // frequency deviation from w0
    Eigen::Index voltage = 0;
    double mp = 0.0;
    double nq = 0.0;
    double tau = 0.0;
    double dw_set = 0.0;  // w_set - w0
    double u_set = 1.0;
};

struct InverterOutputs {
    double p = 0.0;
    double q = 0.0;
    double omega = 0.0;  // rad/s, absolute
    double u = 0.0;
};

/// P, Q, frequency and voltage of one inverter from its absolute states and
/// their derivatives.
InverterOutputs inverter_outputs(const InverterTap& tap, double w0, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& dx);

struct LinearStateSpace {
    Eigen::MatrixXd a;  // 1/s
    std::vector<StateLabel> labels;
    ModelKind kind = ModelKind::full;
    Eigen::VectorXd operating_point;
    std::vector<InverterTap> taps;
    double w0 = 0.0;

    Eigen::Index dimension() const { return a.rows(); }
};

struct NonlinearModel {
    using Rhs = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;
    using Jacobian = std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)>;

    Eigen::Index dimension = 0;
    Rhs rhs;
    Jacobian jacobian;  // may be empty; callers fall back to finite differences
    Eigen::VectorXd equilibrium;
    ModelKind kind = ModelKind::full;
    std::vector<StateLabel> labels;
    std::vector<InverterTap> taps;
    double w0 = 0.0;

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian_at(const Eigen::VectorXd& x) const;
    /// Central-difference Jacobian with a relative step.
    Eigen::MatrixXd finite_difference_jacobian(const Eigen::VectorXd& x, double step = 1e-6) const;

    double residual(const Eigen::VectorXd& x) const;
    /// Residual with every row multiplied by its label time constant, i.e. in
    /// the units of the original equation (volts for branch currents).
    double scaled_residual(const Eigen::VectorXd& x) const;
};

/// Network plus the inverters attached to its inverter nodes (same order).
/// Coupling impedances are ordinary branches of the network.
struct Microgrid {
    NetworkSpec network;
    std::vector<DroopInverter> inverters;

    void validate() const;
};

/// All inverters' kp and kq multiplied; slopes follow.
Microgrid with_gain_scale(const Microgrid& mg, double kp_factor, double kq_factor);

// --- two-bus closed forms -------------------------------------------------

/// First-order network corrections G' and B' of a single R-L connection.
struct GbCorrection {
    double g_prime = 0.0;
    double b_prime = 0.0;
};
GbCorrection corrections_gb(double r, double x, double w0);

/// One inverter behind an aggregate R-L connection to an infinite bus.
struct TwoBusParams {
    DroopInverter inverter;
    double r = 0.0;  // coupling + line
    double x = 0.0;
    double us = 1.0;
    double w0 = 0.0;
};

struct TwoBusModel {
    LinearStateSpace linear;
    NonlinearModel nonlinear;
};

TwoBusModel build_twobus(ModelKind kind, const TwoBusParams& params);

/// The same two-bus system expressed as a Microgrid (single branch to a stiff bus).
Microgrid twobus_microgrid(const TwoBusParams& params);

// --- network models --------------------------------------------------------

struct FullModelOptions {
    double virtual_resistance = 1e4;  // pu, shunt at every interior bus
    double max_condition = 1e12;
    // Keep these setpoints instead of back-solving (used by disturbances).
    std::optional<std::vector<Setpoints>> setpoints;
};

struct FullModel {
    LinearStateSpace linear;
    NonlinearModel nonlinear;
    std::vector<Setpoints> setpoints;
};

FullModel build_network_full(const Microgrid& mg, const FullModelOptions& options = {});

/// Linear reduced model in (theta, omega, rho) blocks; simple3 drops B' and G'.
LinearStateSpace build_network_reduced(const Microgrid& mg, ModelKind kind);

struct ReducedOptions {
    std::optional<std::vector<Setpoints>> setpoints;
};

/// Nonlinear counterpart of build_network_reduced: quasi-stationary port
/// currents plus the first-order dY/ds correction driven by dV/dt.
NonlinearModel build_network_reduced_nonlinear(const Microgrid& mg, ModelKind kind,
                                               const ReducedOptions& options = {});

LinearStateSpace build_linear(const Microgrid& mg, ModelKind kind,
                              const FullModelOptions& options = {});
NonlinearModel build_nonlinear(const Microgrid& mg, ModelKind kind,
                               const FullModelOptions& options = {});

/// Quasi-stationary complex power drawn from every inverter at the flat start.
Eigen::VectorXcd flat_start_power(const LaplaceAdmittance& adm);

}  // namespace mgmor
