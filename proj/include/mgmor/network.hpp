#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/perunit.hpp"

namespace mgmor {

using Complex = std::complex<double>;

/// Series R-L branch. The Laplace-domain impedance is r + j x + s x / w0.
struct Branch {
    std::string from;
    std::string to;
    double r = 0.0;  // pu
    double x = 0.0;  // pu at w0
};

/// Series R-L shunt to ground. x = 0 is a static resistive load.
struct Load {
    std::string bus;
    double r = 0.0;
    double x = 0.0;
};

/// Fixed-voltage bus (infinite grid) at angle zero.
struct StiffBus {
    std::string bus;
    double u = 1.0;
};

/// Topology of a microgrid. Node order used throughout: inverter terminals,
/// then stiff buses, then interior buses.
struct NetworkSpec {
    PerUnitBase base;
    std::vector<std::string> inverter_nodes;
    std::vector<StiffBus> stiff_buses;
    std::vector<std::string> buses;
    std::vector<Branch> branches;
    std::vector<Load> loads;

    std::size_t node_count() const {
        return inverter_nodes.size() + stiff_buses.size() + buses.size();
    }
    std::size_t port_count() const { return inverter_nodes.size() + stiff_buses.size(); }
    bool islanded() const { return stiff_buses.empty(); }

    /// Index in the node order above; throws TopologyError for unknown ids.
    std::size_t index_of(const std::string& id) const;
    std::string name_of(std::size_t index) const;

    /// Checks identifiers, element values and connectivity. Throws TopologyError
    /// or DomainError.
    void validate() const;
};

Complex branch_admittance(double r, double x, Complex s, double w0);
inline Complex branch_admittance(const Branch& b, Complex s, double w0) {
    return branch_admittance(b.r, b.x, s, w0);
}
/// d/ds of the branch admittance at s.
Complex branch_admittance_derivative(double r, double x, Complex s, double w0);

/// Nodal admittance over all nodes at complex frequency s.
Eigen::MatrixXcd nodal_admittance(const NetworkSpec& net, Complex s);

/// First-order Taylor pair of the admittance seen from the inverter terminals.
///
/// y0/y1 and their net/shunt split are over inverter nodes only. The port
/// matrices keep the stiff buses as extra trailing rows/columns so nonlinear
/// models can evaluate the full injection.
struct LaplaceAdmittance {
    Eigen::MatrixXcd y0;
    Eigen::MatrixXcd y1;
    Eigen::MatrixXcd y0_net;
    Eigen::MatrixXcd y0_shunt;
    Eigen::MatrixXcd y1_net;
    Eigen::MatrixXcd y1_shunt;

    Eigen::MatrixXcd port_y0;
    Eigen::MatrixXcd port_y1;
    Eigen::VectorXd stiff_voltage;
};

/// Reduced Taylor pair of a Schur complement. a/b/c/d partition the
/// zero-order matrix, the *1 arguments the first-order one.
struct KronPair {
    Eigen::MatrixXcd s0;
    Eigen::MatrixXcd s1;
};
KronPair kron_reduce(const Eigen::MatrixXcd& full0, const Eigen::MatrixXcd& full1,
                     std::size_t keep);

LaplaceAdmittance assemble_taylor(const NetworkSpec& net);

/// Network structure matrices of the reduced third-order model.
struct StructureMatrices {
    Eigen::MatrixXd b;
    Eigen::MatrixXd g;
    Eigen::MatrixXd b_shunt;  // B tilde
    Eigen::MatrixXd g_shunt;  // G tilde
    Eigen::MatrixXd b_prime;
    Eigen::MatrixXd g_prime;
};

StructureMatrices structure_matrices(const LaplaceAdmittance& adm, double u0 = 1.0);

}  // namespace mgmor
