#include "mgmor/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "mgmor/error.hpp"

namespace mgmor {

std::size_t NetworkSpec::index_of(const std::string& id) const {
    std::size_t k = 0;
    for (const auto& n : inverter_nodes) {
        if (n == id) return k;
        ++k;
    }
    for (const auto& s : stiff_buses) {
        if (s.bus == id) return k;
        ++k;
    }
    for (const auto& b : buses) {
        if (b == id) return k;
        ++k;
    }
    throw TopologyError("unknown node '" + id + "'");
}

std::string NetworkSpec::name_of(std::size_t index) const {
    if (index < inverter_nodes.size()) return inverter_nodes[index];
    index -= inverter_nodes.size();
    if (index < stiff_buses.size()) return stiff_buses[index].bus;
    index -= stiff_buses.size();
    if (index < buses.size()) return buses[index];
    throw TopologyError("node index out of range");
}

void NetworkSpec::validate() const {
    if (inverter_nodes.empty()) throw TopologyError("network has no inverter nodes");

    std::set<std::string> ids;
    auto add_id = [&](const std::string& id) {
        if (id.empty()) throw TopologyError("empty node identifier");
        if (!ids.insert(id).second) throw TopologyError("duplicate node identifier '" + id + "'");
    };
    for (const auto& n : inverter_nodes) add_id(n);
    for (const auto& s : stiff_buses) {
        add_id(s.bus);
        if (!(s.u > 0.0)) throw DomainError("stiff bus '" + s.bus + "' needs positive voltage");
    }
    for (const auto& b : buses) add_id(b);

    const std::size_t n = node_count();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& br : branches) {
        if (br.from == br.to) throw TopologyError("branch connects '" + br.from + "' to itself");
        if (br.r < 0.0 || br.x < 0.0) {
            throw DomainError("branch " + br.from + "-" + br.to + " has negative r or x");
        }
        if (!(br.r + br.x > 0.0)) {
            throw TopologyError("zero-impedance branch " + br.from + "-" + br.to +
                                "; merge the buses instead");
        }
        const auto a = index_of(br.from);
        const auto c = index_of(br.to);
        adj[a].push_back(c);
        adj[c].push_back(a);
    }
    for (const auto& ld : loads) {
        index_of(ld.bus);
        if (!(ld.r > 0.0) || ld.x < 0.0) {
            throw DomainError("load at '" + ld.bus + "' needs r > 0 and x >= 0");
        }
    }

    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
        auto k = q.front();
        q.pop();
        for (auto m : adj[k]) {
            if (!seen[m]) {
                seen[m] = true;
                q.push(m);
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!seen[k]) throw TopologyError("network is disconnected at node '" + name_of(k) + "'");
    }
}

Complex branch_admittance(double r, double x, Complex s, double w0) {
    return 1.0 / (Complex(r, x) + s * (x / w0));
}

Complex branch_admittance_derivative(double r, double x, Complex s, double w0) {
    const Complex z = Complex(r, x) + s * (x / w0);
    return -(x / w0) / (z * z);
}

namespace {

void stamp(Eigen::MatrixXcd& y, std::size_t a, std::size_t c, Complex v) {
    y(a, a) += v;
    y(c, c) += v;
    y(a, c) -= v;
    y(c, a) -= v;
}

Eigen::MatrixXcd nodal_derivative(const NetworkSpec& net) {
    const auto n = static_cast<Eigen::Index>(net.node_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    const double w0 = net.base.w0;
    for (const auto& br : net.branches) {
        stamp(y, net.index_of(br.from), net.index_of(br.to),
              branch_admittance_derivative(br.r, br.x, 0.0, w0));
    }
    for (const auto& ld : net.loads) {
        const auto k = net.index_of(ld.bus);
        y(k, k) += branch_admittance_derivative(ld.r, ld.x, 0.0, w0);
    }
    return y;
}

}  // namespace

Eigen::MatrixXcd nodal_admittance(const NetworkSpec& net, Complex s) {
    const auto n = static_cast<Eigen::Index>(net.node_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    const double w0 = net.base.w0;
    for (const auto& br : net.branches) {
        stamp(y, net.index_of(br.from), net.index_of(br.to), branch_admittance(br, s, w0));
    }
    for (const auto& ld : net.loads) {
        const auto k = net.index_of(ld.bus);
        y(k, k) += branch_admittance(ld.r, ld.x, s, w0);
    }
    return y;
}

KronPair kron_reduce(const Eigen::MatrixXcd& full0, const Eigen::MatrixXcd& full1,
                     std::size_t keep) {
    const auto k = static_cast<Eigen::Index>(keep);
    const auto m = full0.rows() - k;
    if (m == 0) return {full0, full1};

    const Eigen::MatrixXcd a0 = full0.topLeftCorner(k, k);
    const Eigen::MatrixXcd b0 = full0.topRightCorner(k, m);
    const Eigen::MatrixXcd c0 = full0.bottomLeftCorner(m, k);
    const Eigen::MatrixXcd d0 = full0.bottomRightCorner(m, m);
    const Eigen::MatrixXcd a1 = full1.topLeftCorner(k, k);
    const Eigen::MatrixXcd b1 = full1.topRightCorner(k, m);
    const Eigen::MatrixXcd c1 = full1.bottomLeftCorner(m, k);
    const Eigen::MatrixXcd d1 = full1.bottomRightCorner(m, m);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(d0);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        std::ostringstream os;
        os << "interior admittance block is singular (rcond " << rcond
           << "); an interior bus is isolated from every shunt and port";
        throw ReductionError(os.str());
    }
    const Eigen::MatrixXcd dc0 = lu.solve(c0);  // D0^-1 C0

    // S1 = A1 - B1 X + B0 D0^-1 (D1 X - C1), X = D0^-1 C0
    KronPair out;
    out.s0 = a0 - b0 * dc0;
    out.s1 = a1 - b1 * dc0 + b0 * lu.solve(d1 * dc0 - c1);
    return out;
}

LaplaceAdmittance assemble_taylor(const NetworkSpec& net) {
    net.validate();
    const Eigen::MatrixXcd y0_full = nodal_admittance(net, 0.0);
    const Eigen::MatrixXcd y1_full = nodal_derivative(net);
    const auto ports = net.port_count();
    const auto kp = kron_reduce(y0_full, y1_full, ports);

    const auto n = static_cast<Eigen::Index>(net.inverter_nodes.size());
    LaplaceAdmittance adm;
    adm.port_y0 = kp.s0;
    adm.port_y1 = kp.s1;
    adm.stiff_voltage.resize(static_cast<Eigen::Index>(net.stiff_buses.size()));
    for (std::size_t k = 0; k < net.stiff_buses.size(); ++k) {
        adm.stiff_voltage(static_cast<Eigen::Index>(k)) = net.stiff_buses[k].u;
    }

    // Row sums over all ports: what stays after removing the zero-sum network
    // part is the effective shunt at each inverter terminal.
    const Eigen::VectorXcd rs0 = kp.s0.topRows(n).rowwise().sum();
    const Eigen::VectorXcd rs1 = kp.s1.topRows(n).rowwise().sum();

    adm.y0 = kp.s0.topLeftCorner(n, n);
    adm.y1 = kp.s1.topLeftCorner(n, n);
    adm.y0_shunt = rs0.asDiagonal();
    adm.y1_shunt = rs1.asDiagonal();
    adm.y0_net = adm.y0 - adm.y0_shunt;
    adm.y1_net = adm.y1 - adm.y1_shunt;
    return adm;
}

StructureMatrices structure_matrices(const LaplaceAdmittance& adm, double u0) {
    if (!(u0 > 0.0)) throw DomainError("structure matrices need u0 > 0");
    const double u2 = u0 * u0;
    StructureMatrices s;
    s.b = -u2 * adm.y0_net.imag();
    s.g = u2 * adm.y0_net.real();
    s.b_shunt = -2.0 * u2 * adm.y0_shunt.imag();
    s.g_shunt = 2.0 * u2 * adm.y0_shunt.real();
    const Eigen::MatrixXcd y1 = adm.y1_net + adm.y1_shunt;
    s.b_prime = u2 * y1.imag();
    s.g_prime = -u2 * y1.real();
    return s;
}

}  // namespace mgmor
