#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/models.hpp"

namespace mgmor {

enum class Solver {
    dopri45,  // explicit adaptive Dormand-Prince 5(4)
    trbdf2,   // implicit trapezoidal / BDF2 composite, L-stable
};

std::string_view to_string(Solver s);
Solver parse_solver(std::string_view name);

struct IntegrateOptions {
    Solver solver = Solver::trbdf2;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double initial_step = 0.0;  // 0 = automatic
    double fixed_step = 0.0;    // > 0 disables error control
    double divergence_threshold = 1e6;
    std::size_t max_steps = 2'000'000;
    bool store_states = true;
    bool compute_outputs = true;
};

struct Trajectory {
    std::vector<double> t;
    Eigen::MatrixXd states;  // one row per stored time
    std::vector<StateLabel> labels;
    std::vector<std::string> inverters;
    // steps x inverters
    Eigen::MatrixXd p, q, omega, u;
    bool diverged = false;
    long divergence_index = -1;  // first stored row beyond the threshold
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    std::size_t jacobian_evaluations = 0;
    std::size_t factorizations = 0;

    Eigen::VectorXd final_state() const { return states.row(states.rows() - 1).transpose(); }
};

Trajectory integrate(const NonlinearModel& model, const Eigen::VectorXd& x0, double t_end,
                     const IntegrateOptions& opt = {});

/// Linear model in absolute coordinates: dx/dt = A (x - operating_point).
NonlinearModel as_nonlinear(const LinearStateSpace& ss);

Trajectory integrate(const LinearStateSpace& ss, const Eigen::VectorXd& x0, double t_end,
                     const IntegrateOptions& opt = {});

/// Piecewise run: models[k] is active from switch_times[k-1] (0 for k = 0) up
/// to switch_times[k] (t_end for the last). All models share one state layout.
Trajectory integrate_piecewise(const std::vector<NonlinearModel>& models,
                               const std::vector<double>& switch_times, const Eigen::VectorXd& x0,
                               double t_end, const IntegrateOptions& opt = {});

// --- disturbances ----------------------------------------------------------

/// Initial state with one entry displaced.
Eigen::VectorXd perturb_state(const Eigen::VectorXd& x0, Eigen::Index index, double delta);

/// Angle of the named inverter displaced from the model equilibrium.
Eigen::VectorXd angle_kick(const NonlinearModel& model, const std::string& node, double delta);

/// Load conductance at a bus multiplied by `factor` (impedance divided).
Microgrid scale_load(const Microgrid& mg, const std::string& bus, double factor);

/// Model after a disturbance that keeps the pre-disturbance setpoints.
NonlinearModel rebuild_with_setpoints(const Microgrid& mg, ModelKind kind,
                                      const NonlinearModel& before,
                                      const FullModelOptions& options = {});

// --- benchmark -------------------------------------------------------------

/// Identical-inverter radial cascade: inverter k behind its coupling impedance
/// at bus k, consecutive buses joined by lines, a series R-L load on every bus.
struct CascadeParams {
    PerUnitBase base;
    double mp = 9.3e-5;       // rad/s/W
    double nq = 1.3e-3;       // V/VAr
    double sn_va = 1e4;
    double wc = 31.4;         // rad/s
    double rc_ohm = 0.03;
    double lc_h = 0.35e-3;
    double line_r_ohm_per_km = 0.165;
    double line_l_h_per_km = 0.26e-3;
    double line_x_scale = 1.0;  // multiplies every line reactance
    // Reused cyclically when the cascade is longer than the lists.
    std::vector<double> line_km{5.0, 4.1, 3.0, 6.0};
    std::vector<std::complex<double>> loads_ohm{{25.0, 0.0}, {20.0, 0.0}, {20.0, 4.72}, {40.0, 12.58},
                                                {18.4, 0.157}};  // at nominal frequency
};

CascadeParams table1_params();
Microgrid make_cascade(int n, const CascadeParams& p = table1_params());

struct BenchRecord {
    ModelKind kind = ModelKind::full;
    int n_inverters = 0;
    Eigen::Index n_states = 0;
    Solver solver = Solver::trbdf2;
    double wall_time = 0.0;  // s, median
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    bool ok = true;
    std::string error;
};

struct BenchOptions {
    std::vector<ModelKind> kinds{ModelKind::full, ModelKind::hifi3};
    std::vector<Solver> solvers{Solver::trbdf2};
    double t_end = 1.0;
    int repeats = 5;
    int warmup = 1;
    double angle_kick = 1e-3;  // rad on the first inverter
    IntegrateOptions integrate;
};

std::vector<BenchRecord> bench(const std::vector<Microgrid>& grids, const BenchOptions& opt = {});

}  // namespace mgmor
