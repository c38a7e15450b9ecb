#include <cmath>
#include <memory>
#include <sstream>

#include "mgmor/error.hpp"
#include "mgmor/models.hpp"

namespace mgmor {

Eigen::VectorXcd flat_start_power(const LaplaceAdmittance& adm) {
    const auto n = adm.y0.rows();
    const auto ports = adm.port_y0.rows();
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(ports);
    for (Eigen::Index k = 0; k < adm.stiff_voltage.size(); ++k) v(n + k) = adm.stiff_voltage(k);
    const Eigen::VectorXcd i = adm.port_y0.topRows(n) * v;
    return i.conjugate();
}

namespace {

void require_reduced(ModelKind kind) {
    if (kind == ModelKind::full) {
        throw ModelError("reduced builder called with the full model kind");
    }
}

std::vector<StateLabel> block_labels(const Microgrid& mg) {
    std::vector<StateLabel> labels;
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::angle, inv.node, 0.0});
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::frequency, inv.node, inv.tau});
    for (const auto& inv : mg.inverters) labels.push_back({StateKind::voltage, inv.node, inv.tau});
    return labels;
}

std::vector<InverterTap> block_taps(const Microgrid& mg, const std::vector<Setpoints>& sp) {
    const auto n = static_cast<Eigen::Index>(mg.inverters.size());
    const double w0 = mg.network.base.w0;
    std::vector<InverterTap> taps;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& inv = mg.inverters[static_cast<std::size_t>(i)];
        InverterTap t;
        t.node = inv.node;
        t.theta = i;
        t.omega = n + i;
        t.voltage = 2 * n + i;
        t.mp = inv.gains.mp;
        t.nq = inv.gains.nq;
        t.tau = inv.tau;
        t.dw_set = sp[static_cast<std::size_t>(i)].w_set - w0;
        t.u_set = sp[static_cast<std::size_t>(i)].u_set;
        taps.push_back(t);
    }
    return taps;
}

std::vector<Setpoints> flat_setpoints(const Microgrid& mg, const LaplaceAdmittance& adm) {
    const Eigen::VectorXcd s0 = flat_start_power(adm);
    std::vector<Setpoints> sp;
    for (std::size_t i = 0; i < mg.inverters.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        sp.push_back(backsolve_setpoints(mg.inverters[i], s0(k).real(), s0(k).imag(),
                                         mg.network.base.w0));
    }
    return sp;
}

Eigen::VectorXd flat_state(Eigen::Index n) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3 * n);
    x.tail(n).setOnes();
    return x;
}

}  // namespace

LinearStateSpace build_network_reduced(const Microgrid& mg, ModelKind kind) {
    require_reduced(kind);
    mg.validate();
    const auto adm = assemble_taylor(mg.network);
    auto sm = structure_matrices(adm, 1.0);
    if (kind == ModelKind::simple3) {
        sm.b_prime.setZero();
        sm.g_prime.setZero();
    }

    const auto n = static_cast<Eigen::Index>(mg.inverters.size());
    Eigen::VectorXd lp(n), lq(n), tau(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& inv = mg.inverters[static_cast<std::size_t>(i)];
        lp(i) = 1.0 / inv.gains.mp;
        lq(i) = 1.0 / inv.gains.nq;
        tau(i) = inv.tau;
    }

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd m_rho = Eigen::MatrixXd(tau.cwiseProduct(lq).asDiagonal()) - sm.b_prime;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_rho(m_rho);
    if (!(lu_rho.rcond() > 1e-12)) {
        Eigen::Index worst = 0;
        m_rho.diagonal().cwiseAbs().minCoeff(&worst);
        std::ostringstream os;
        os << "singular mass matrix: tau*Lambda_q - B' loses rank (rcond " << lu_rho.rcond()
           << "); smallest diagonal term " << m_rho(worst, worst) << " at inverter '"
           << mg.inverters[static_cast<std::size_t>(worst)].node << "'";
        throw ModelError(os.str());
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.block(0, 0, n, n) = eye;
    m.block(n, n, n, n) = tau.cwiseProduct(lp).asDiagonal();
    m.block(n, 2 * n, n, n) = -sm.g_prime;
    m.block(2 * n, 2 * n, n, n) = m_rho;

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    k.block(0, n, n, n) = eye;
    k.block(n, 0, n, n) = -sm.b;
    k.block(n, n, n, n) = -(Eigen::MatrixXd(lp.asDiagonal()) - sm.b_prime);
    k.block(n, 2 * n, n, n) = -(sm.g + sm.g_shunt);
    k.block(2 * n, 0, n, n) = sm.g;
    k.block(2 * n, n, n, n) = -sm.g_prime;
    k.block(2 * n, 2 * n, n, n) = -(Eigen::MatrixXd(lq.asDiagonal()) + sm.b + sm.b_shunt);

    LinearStateSpace ss;
    ss.kind = kind;
    ss.a = m.partialPivLu().solve(k);
    ss.labels = block_labels(mg);
    ss.operating_point = flat_state(n);
    ss.taps = block_taps(mg, flat_setpoints(mg, adm));
    ss.w0 = mg.network.base.w0;
    return ss;
}

namespace {

struct ReducedData {
    Eigen::Index n = 0;
    Eigen::MatrixXcd y0;  // ports x ports
    Eigen::MatrixXcd y1;  // inverter rows/cols only
    Eigen::MatrixXd y1_re, y1_im;
    Eigen::VectorXd stiff;
    Eigen::VectorXd mp, nq, tau, dw_set, u_set;
    bool first_order = true;
};

struct ReducedWork {
    Eigen::VectorXcd v, e, i0, rot, i_rot, vdot, i1;
    Eigen::MatrixXd mq;
    Eigen::VectorXd rq, p, q, udot, c, s, vr, vi;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

void reduced_rhs(const ReducedData& d, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    thread_local ReducedWork w;
    const auto n = d.n;
    const auto ports = d.y0.rows();
    w.v.resize(ports);
    w.e.resize(n);
    w.p.resize(n);
    w.q.resize(n);
    w.udot.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w.e(i) = std::polar(1.0, x(i));
        w.v(i) = x(2 * n + i) * w.e(i);
    }
    for (Eigen::Index k = 0; k < d.stiff.size(); ++k) w.v(n + k) = d.stiff(k);

    w.i0.noalias() = d.y0.topRows(n) * w.v;
    if (d.first_order) {
        // Q_i = Q0_i + Im(V_i conj(sum_j Y1_ij (Udot_j + j U_j Omega_j) e_j)), linear in Udot.
        w.rot.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) w.rot(j) = Complex(0.0, x(2 * n + j) * x(n + j)) * w.e(j);
        w.i_rot.noalias() = d.y1 * w.rot;
        // mq_ij = nq_i Im(V_i conj(Y1_ij e_j)), written with real outer products.
        w.c = w.e.real();
        w.s = w.e.imag();
        w.vr = w.v.head(n).real();
        w.vi = w.v.head(n).imag();
        w.mq.noalias() = (w.vi * w.c.transpose() - w.vr * w.s.transpose()).cwiseProduct(d.y1_re);
        w.mq.noalias() -= (w.vr * w.c.transpose() + w.vi * w.s.transpose()).cwiseProduct(d.y1_im);
        w.mq = d.nq.asDiagonal() * w.mq;
        w.rq.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q0 = (w.v(i) * std::conj(w.i0(i) + w.i_rot(i))).imag();
            w.mq(i, i) += d.tau(i);
            w.rq(i) = d.u_set(i) - x(2 * n + i) - d.nq(i) * q0;
        }
        w.lu.compute(w.mq);
        w.udot = w.lu.solve(w.rq);
        w.vdot.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) w.vdot(j) = w.udot(j) * w.e(j) + w.rot(j);
        w.i1.noalias() = d.y1 * w.vdot;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex s = w.v(i) * std::conj(w.i0(i) + w.i1(i));
            w.p(i) = s.real();
            w.q(i) = s.imag();
        }
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            const Complex s = w.v(i) * std::conj(w.i0(i));
            w.p(i) = s.real();
            w.q(i) = s.imag();
            w.udot(i) = (d.u_set(i) - x(2 * n + i) - d.nq(i) * w.q(i)) / d.tau(i);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        dx(i) = x(n + i);
        dx(n + i) = (d.dw_set(i) - x(n + i) - d.mp(i) * w.p(i)) / d.tau(i);
        dx(2 * n + i) = w.udot(i);
    }
}

}  // namespace

NonlinearModel build_network_reduced_nonlinear(const Microgrid& mg, ModelKind kind,
                                               const ReducedOptions& options) {
    require_reduced(kind);
    mg.validate();
    const auto adm = assemble_taylor(mg.network);
    const auto n = static_cast<Eigen::Index>(mg.inverters.size());

    const auto setpoints = options.setpoints ? *options.setpoints : flat_setpoints(mg, adm);
    if (setpoints.size() != mg.inverters.size()) {
        throw ModelError("setpoint override has the wrong length");
    }

    auto d = std::make_shared<ReducedData>();
    d->n = n;
    d->y0 = adm.port_y0;
    d->y1 = adm.y1;
    d->y1_re = adm.y1.real();
    d->y1_im = adm.y1.imag();
    d->stiff = adm.stiff_voltage;
    d->first_order = kind == ModelKind::hifi3;
    d->mp.resize(n);
    d->nq.resize(n);
    d->tau.resize(n);
    d->dw_set.resize(n);
    d->u_set.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& inv = mg.inverters[static_cast<std::size_t>(i)];
        d->mp(i) = inv.gains.mp;
        d->nq(i) = inv.gains.nq;
        d->tau(i) = inv.tau;
        d->dw_set(i) = setpoints[static_cast<std::size_t>(i)].w_set - mg.network.base.w0;
        d->u_set(i) = setpoints[static_cast<std::size_t>(i)].u_set;
    }

    NonlinearModel nl;
    nl.dimension = 3 * n;
    nl.kind = kind;
    nl.w0 = mg.network.base.w0;
    nl.labels = block_labels(mg);
    nl.taps = block_taps(mg, setpoints);
    nl.equilibrium = flat_state(n);
    nl.rhs = [d](const Eigen::VectorXd& x, Eigen::VectorXd& dx) { reduced_rhs(*d, x, dx); };
    return nl;
}

}  // namespace mgmor
