// Full electromagnetic network model: inverter triples plus dq currents of
// every inductive branch and load. Interior bus voltages are algebraic,
// resolved through a virtual shunt resistor at each interior bus.

#include <cmath>
#include <memory>
#include <sstream>

#include "mgmor/error.hpp"
#include "mgmor/models.hpp"

namespace mgmor {

namespace {

struct Element {
    std::string owner;
    Eigen::Index from = -1;
    Eigen::Index to = -1;  // -1 for a load (ground)
    double r = 0.0;
    double x = 0.0;
    double l = 0.0;  // x / w0
};

struct FullData {
    Eigen::Index n = 0;      // inverters
    Eigen::Index ports = 0;  // inverters + stiff buses
    Eigen::Index ne = 0;     // inductive elements
    Eigen::VectorXd stiff;
    Eigen::VectorXd r, x, l;
    // dI/dt = (dp * V_ports + di * I - z I) / L
    Eigen::MatrixXd dp, di;
    // inverter output current J = jp * V_ports + ji * I
    Eigen::MatrixXd jp, ji;
    Eigen::VectorXd mp, nq, tau, dw_set, u_set;

    Eigen::Index state_dim() const { return 3 * n + 2 * ne; }
};

Eigen::VectorXcd port_voltages(const FullData& d, const Eigen::VectorXd& s) {
    Eigen::VectorXcd v(d.ports);
    for (Eigen::Index i = 0; i < d.n; ++i) v(i) = std::polar(s(2 * d.n + i), s(i));
    for (Eigen::Index k = 0; k < d.stiff.size(); ++k) v(d.n + k) = d.stiff(k);
    return v;
}

Eigen::VectorXcd element_currents(const FullData& d, const Eigen::VectorXd& s) {
    Eigen::VectorXcd i(d.ne);
    for (Eigen::Index e = 0; e < d.ne; ++e) i(e) = Complex(s(3 * d.n + 2 * e), s(3 * d.n + 2 * e + 1));
    return i;
}

void full_rhs(const FullData& d, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const auto n = d.n;
    const Eigen::VectorXcd v = port_voltages(d, s);
    const Eigen::VectorXcd cur = element_currents(d, s);
    const Eigen::VectorXcd drive = d.dp * v + d.di * cur;
    for (Eigen::Index e = 0; e < d.ne; ++e) {
        const Complex di = (drive(e) - Complex(d.r(e), d.x(e)) * cur(e)) / d.l(e);
        ds(3 * n + 2 * e) = di.real();
        ds(3 * n + 2 * e + 1) = di.imag();
    }
    const Eigen::VectorXcd j = d.jp * v + d.ji * cur;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex sp = v(i) * std::conj(j(i));
        ds(i) = s(n + i);
        ds(n + i) = (d.dw_set(i) - s(n + i) - d.mp(i) * sp.real()) / d.tau(i);
        ds(2 * n + i) = (d.u_set(i) - s(2 * n + i) - d.nq(i) * sp.imag()) / d.tau(i);
    }
}

void full_jacobian(const FullData& d, const Eigen::VectorXd& s, Eigen::MatrixXd& jac) {
    const auto n = d.n;
    const auto dim = d.state_dim();
    jac.setZero(dim, dim);
    const Eigen::VectorXcd v = port_voltages(d, s);
    const Eigen::VectorXcd cur = element_currents(d, s);
    const Eigen::VectorXcd jout = d.jp * v + d.ji * cur;

    // Rows driven by a perturbation: element currents get dI/dt directly, the
    // inverter rows go through dS = dV conj(J) + V conj(dJ).
    auto fill_column = [&](Eigen::Index col, const Eigen::VectorXcd& d_drive,
                           const Eigen::VectorXcd& d_j, Eigen::Index own, Complex dv_own) {
        for (Eigen::Index e = 0; e < d.ne; ++e) {
            const Complex di = d_drive(e) / d.l(e);
            jac(3 * n + 2 * e, col) += di.real();
            jac(3 * n + 2 * e + 1, col) += di.imag();
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            Complex ds = v(i) * std::conj(d_j(i));
            if (i == own) ds += dv_own * std::conj(jout(i));
            jac(n + i, col) -= d.mp(i) * ds.real() / d.tau(i);
            jac(2 * n + i, col) -= d.nq(i) * ds.imag() / d.tau(i);
        }
    };

    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex e = std::polar(1.0, s(i));
        const Complex dv_theta = Complex(0.0, 1.0) * v(i);
        fill_column(i, d.dp.col(i).cast<Complex>() * dv_theta, d.jp.col(i).cast<Complex>() * dv_theta,
                    i, dv_theta);
        fill_column(2 * n + i, d.dp.col(i).cast<Complex>() * e, d.jp.col(i).cast<Complex>() * e, i, e);
        jac(i, n + i) = 1.0;
        jac(n + i, n + i) -= 1.0 / d.tau(i);
        jac(2 * n + i, 2 * n + i) -= 1.0 / d.tau(i);
    }
    for (Eigen::Index e = 0; e < d.ne; ++e) {
        for (int part = 0; part < 2; ++part) {
            const Complex unit = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
            Eigen::VectorXcd d_drive = d.di.col(e).cast<Complex>() * unit;
            d_drive(e) -= Complex(d.r(e), d.x(e)) * unit;
            fill_column(3 * n + 2 * e + part, d_drive, d.ji.col(e).cast<Complex>() * unit, -1,
                        Complex(0.0));
        }
    }
}

}  // namespace

FullModel build_network_full(const Microgrid& mg, const FullModelOptions& options) {
    mg.validate();
    const auto& net = mg.network;
    if (!(options.virtual_resistance > 0.0)) throw DomainError("virtual resistance must be positive");
    const double w0 = net.base.w0;
    const auto n = static_cast<Eigen::Index>(net.inverter_nodes.size());
    const auto ports = static_cast<Eigen::Index>(net.port_count());
    const auto nodes = static_cast<Eigen::Index>(net.node_count());
    const auto ni = nodes - ports;

    std::vector<Element> elements;
    Eigen::MatrixXd res_lap = Eigen::MatrixXd::Zero(nodes, nodes);
    for (const auto& br : net.branches) {
        const auto a = static_cast<Eigen::Index>(net.index_of(br.from));
        const auto c = static_cast<Eigen::Index>(net.index_of(br.to));
        if (br.x > 0.0) {
            elements.push_back({br.from + "->" + br.to, a, c, br.r, br.x, br.x / w0});
        } else {
            const double g = 1.0 / br.r;
            res_lap(a, a) += g;
            res_lap(c, c) += g;
            res_lap(a, c) -= g;
            res_lap(c, a) -= g;
        }
    }
    for (const auto& ld : net.loads) {
        const auto k = static_cast<Eigen::Index>(net.index_of(ld.bus));
        if (ld.x > 0.0) {
            elements.push_back({"load@" + ld.bus, k, -1, ld.r, ld.x, ld.x / w0});
        } else {
            res_lap(k, k) += 1.0 / ld.r;
        }
    }
    const auto ne = static_cast<Eigen::Index>(elements.size());

    // Incidence: +1 where current leaves a node into the element.
    Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(nodes, ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
        inc(elements[static_cast<std::size_t>(e)].from, e) += 1.0;
        if (elements[static_cast<std::size_t>(e)].to >= 0) inc(elements[static_cast<std::size_t>(e)].to, e) -= 1.0;
    }

    auto d = std::make_shared<FullData>();
    d->n = n;
    d->ports = ports;
    d->ne = ne;
    d->stiff.resize(static_cast<Eigen::Index>(net.stiff_buses.size()));
    for (std::size_t k = 0; k < net.stiff_buses.size(); ++k) {
        d->stiff(static_cast<Eigen::Index>(k)) = net.stiff_buses[k].u;
    }
    d->r.resize(ne);
    d->x.resize(ne);
    d->l.resize(ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
        const auto& el = elements[static_cast<std::size_t>(e)];
        d->r(e) = el.r;
        d->x(e) = el.x;
        d->l(e) = el.l;
    }

    // Interior voltages: (R_II + g_v) V_I = -(R_IP V_P + E_I I)
    const Eigen::MatrixXd inc_p = inc.topRows(ports);
    const Eigen::MatrixXd inc_i = inc.bottomRows(ni);
    Eigen::MatrixXd vi_from_p = Eigen::MatrixXd::Zero(ni, ports);
    Eigen::MatrixXd vi_from_i = Eigen::MatrixXd::Zero(ni, ne);
    if (ni > 0) {
        Eigen::MatrixXd h = res_lap.bottomRightCorner(ni, ni);
        h.diagonal().array() += 1.0 / options.virtual_resistance;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(h);
        if (!(lu.rcond() * options.max_condition > 1.0)) {
            std::ostringstream os;
            os << "virtual-resistor interior matrix is ill-conditioned (rcond " << lu.rcond()
               << "); adjust virtual_resistance";
            throw ModelError(os.str());
        }
        vi_from_p = -lu.solve(Eigen::MatrixXd(res_lap.bottomLeftCorner(ni, ports)));
        vi_from_i = -lu.solve(inc_i);
    }
    d->dp = inc_p.transpose() + inc_i.transpose() * vi_from_p;
    d->di = inc_i.transpose() * vi_from_i;
    const Eigen::MatrixXd res_src_p = res_lap.topLeftCorner(n, ports);
    const Eigen::MatrixXd res_src_i = res_lap.block(0, ports, n, ni);
    d->jp = res_src_p + res_src_i * vi_from_p;
    d->ji = inc.topRows(n) + res_src_i * vi_from_i;

    // Flat-start steady state: (diag(z) - di) I = dp V_P
    Eigen::VectorXcd vp(ports);
    for (Eigen::Index i = 0; i < n; ++i) vp(i) = 1.0;
    for (Eigen::Index k = 0; k < d->stiff.size(); ++k) vp(n + k) = d->stiff(k);
    Eigen::MatrixXcd ss = -d->di.cast<Complex>();
    for (Eigen::Index e = 0; e < ne; ++e) ss(e, e) += Complex(d->r(e), d->x(e));
    Eigen::VectorXcd i_eq = Eigen::VectorXcd::Zero(ne);
    if (ne > 0) {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ss);
        if (!(lu.rcond() * options.max_condition > 1.0)) {
            std::ostringstream os;
            os << "steady-state branch system is ill-conditioned (rcond " << lu.rcond() << ")";
            throw ModelError(os.str());
        }
        const Eigen::VectorXcd rhs = d->dp.cast<Complex>() * vp;
        i_eq = lu.solve(rhs);
        for (int it = 0; it < 2; ++it) i_eq += lu.solve(rhs - ss * i_eq);
    }
    const Eigen::VectorXcd j_eq = d->jp.cast<Complex>() * vp + d->ji.cast<Complex>() * i_eq;

    std::vector<Setpoints> setpoints;
    if (options.setpoints) {
        if (options.setpoints->size() != mg.inverters.size()) {
            throw ModelError("setpoint override has the wrong length");
        }
        setpoints = *options.setpoints;
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex s0 = vp(i) * std::conj(j_eq(i));
            setpoints.push_back(
                backsolve_setpoints(mg.inverters[static_cast<std::size_t>(i)], s0.real(), s0.imag(), w0));
        }
    }

    d->mp.resize(n);
    d->nq.resize(n);
    d->tau.resize(n);
    d->dw_set.resize(n);
    d->u_set.resize(n);
    std::vector<StateLabel> labels;
    std::vector<InverterTap> taps;
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::angle, inv.node, 0.0});
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::frequency, inv.node, inv.tau});
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::voltage, inv.node, inv.tau});
    for (const auto& el : elements) {
        labels.push_back({StateKind::current_d, el.owner, el.l});
        labels.push_back({StateKind::current_q, el.owner, el.l});
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& inv = mg.inverters[static_cast<std::size_t>(i)];
        const auto& sp = setpoints[static_cast<std::size_t>(i)];
        d->mp(i) = inv.gains.mp;
        d->nq(i) = inv.gains.nq;
        d->tau(i) = inv.tau;
        d->dw_set(i) = sp.w_set - w0;
        d->u_set(i) = sp.u_set;
        taps.push_back({inv.node, i, n + i, 2 * n + i, inv.gains.mp, inv.gains.nq, inv.tau,
                        sp.w_set - w0, sp.u_set});
    }

    Eigen::VectorXd eq = Eigen::VectorXd::Zero(d->state_dim());
    eq.segment(2 * n, n).setOnes();
    for (Eigen::Index e = 0; e < ne; ++e) {
        eq(3 * n + 2 * e) = i_eq(e).real();
        eq(3 * n + 2 * e + 1) = i_eq(e).imag();
    }

    FullModel out;
    out.setpoints = setpoints;
    auto& nl = out.nonlinear;
    nl.dimension = d->state_dim();
    nl.kind = ModelKind::full;
    nl.w0 = w0;
    nl.labels = labels;
    nl.taps = taps;
    nl.equilibrium = eq;
    nl.rhs = [d](const Eigen::VectorXd& s, Eigen::VectorXd& ds) { full_rhs(*d, s, ds); };
    nl.jacobian = [d](const Eigen::VectorXd& s, Eigen::MatrixXd& j) { full_jacobian(*d, s, j); };

    auto& lin = out.linear;
    lin.kind = ModelKind::full;
    lin.labels = labels;
    lin.taps = taps;
    lin.operating_point = eq;
    lin.w0 = w0;
    lin.a = nl.jacobian_at(eq);
    return out;
}

}  // namespace mgmor
