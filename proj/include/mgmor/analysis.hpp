#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/models.hpp"

namespace mgmor {

struct EigenReport {
    Eigen::VectorXcd eigenvalues;  // 1/s
    // Largest real part over modes with |lambda| >= zero_tol; -inf if none.
    double abscissa = -std::numeric_limits<double>::infinity();
    int n_zero_modes = 0;
    bool stable = true;  // abscissa < 0 (a tie at 0 is unstable)
};

constexpr double default_zero_tol = 1e-6;

/// Diagonal similarity scaling (powers of two) that equalizes row and column
/// norms. Returns the balanced matrix; `scale` receives D with B = D^-1 A D.
Eigen::MatrixXd balance(const Eigen::MatrixXd& a, Eigen::VectorXd* scale = nullptr);

EigenReport eigen_report(const Eigen::MatrixXd& a, double zero_tol = default_zero_tol);
EigenReport eigen_report(const LinearStateSpace& ss, double zero_tol = default_zero_tol);

enum class GainAxis { kp, kq };

std::string_view to_string(GainAxis axis);
GainAxis parse_gain_axis(std::string_view name);

/// Spectral abscissa as a function of a scalar parameter.
using AbscissaFunction = std::function<double(double)>;

struct CriticalOptions {
    double rel_tol = 1e-3;
    // Geometric scan points used to locate the first sign change in the bracket.
    int scan_points = 40;
};

struct CriticalResult {
    double value = 0.0;  // parameter where the abscissa crosses zero
    double lo = 0.0;     // final bracket, stable side
    double hi = 0.0;     // final bracket, unstable side
    int evaluations = 0;
};

/// Smallest parameter in [lo, hi] at which a model stable at `lo` loses
/// stability, refined by bisection to rel_tol. Throws BracketError when `lo`
/// is already unstable or no loss of stability is found.
CriticalResult critical_parameter(const AbscissaFunction& f, double lo, double hi,
                                  const CriticalOptions& opt = {});

/// Builder mapping (kp, kq) of the reference inverter to a linear model. Every
/// inverter is scaled by the same factor.
using GainModelBuilder = std::function<LinearStateSpace(double kp, double kq)>;

GainModelBuilder gain_builder(const Microgrid& mg, ModelKind kind,
                              const FullModelOptions& options = {});

/// Abscissa of the model produced by `builder`. A model that cannot be built
/// (singular reduced mass matrix) counts as unstable and returns +inf.
double abscissa_of(const GainModelBuilder& builder, double kp, double kq,
                   double zero_tol = default_zero_tol);

/// Critical kp (axis kp, kq held at `other`) or critical kq (kp held).
CriticalResult critical_gain(const GainModelBuilder& builder, GainAxis axis, double other,
                             double lo, double hi, const CriticalOptions& opt = {},
                             double zero_tol = default_zero_tol);

struct StabilityBoundary {
    ModelKind kind = ModelKind::full;
    std::vector<double> kp;  // grid columns
    std::vector<double> kq;  // grid rows
    // verdicts[row * kp.size() + col] for (kp[col], kq[row])
    std::vector<char> stable;
    std::vector<double> abscissa;
    // Refined (kp, kq) crossings along each kq row, ordered by row then kp.
    std::vector<std::pair<double, double>> boundary;

    bool stable_at(std::size_t row, std::size_t col) const { return stable[row * kp.size() + col] != 0; }
};

struct RegionOptions {
    unsigned threads = 0;  // 0 = hardware concurrency
    double rel_tol = 1e-3;
    double zero_tol = default_zero_tol;
};

/// Evenly spaced grid helper, inclusive of both ends.
std::vector<double> linspace(double lo, double hi, std::size_t n);

StabilityBoundary stability_region(const GainModelBuilder& builder, ModelKind kind,
                                   const std::vector<double>& kp, const std::vector<double>& kq,
                                   const RegionOptions& opt = {});

/// Largest stable mp (rad/s per pu) of the conventional two-bus model, from
/// the delay argument on the quasi-stationary power. +inf when G = 0.
double bound_conventional(double r, double x, const DroopGains& gains, double tau, double us = 1.0);

struct HifiBound {
    double kp_max = 0.0;
    double kq_max = 0.0;
};

/// Closed-form normalized gain limits of the corrected two-bus model.
HifiBound bound_hifi(double r, double x, double sn, double tau, double w0, double u0 = 1.0);

}  // namespace mgmor
