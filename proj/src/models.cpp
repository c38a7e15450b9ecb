#include "mgmor/models.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "mgmor/error.hpp"

namespace mgmor {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::full: return "full";
        case ModelKind::simple3: return "simple3";
        case ModelKind::hifi3: return "hifi3";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "full") return ModelKind::full;
    if (name == "simple3" || name == "simple") return ModelKind::simple3;
    if (name == "hifi3" || name == "proposed") return ModelKind::hifi3;
    throw DomainError("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(StateKind kind) {
    switch (kind) {
        case StateKind::angle: return "theta";
        case StateKind::frequency: return "omega";
        case StateKind::voltage: return "u";
        case StateKind::current_d: return "id";
        case StateKind::current_q: return "iq";
    }
    return "?";
}

std::string StateLabel::name() const {
    return std::string(to_string(kind)) + "[" + owner + "]";
}

InverterOutputs inverter_outputs(const InverterTap& tap, double w0, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& dx) {
    InverterOutputs o;
    const double om = x(tap.omega);
    const double u = x(tap.voltage);
    o.p = (tap.dw_set - om - tap.tau * dx(tap.omega)) / tap.mp;
    o.q = (tap.u_set - u - tap.tau * dx(tap.voltage)) / tap.nq;
    o.omega = w0 + om;
    o.u = u;
    return o;
}

Eigen::VectorXd NonlinearModel::eval(const Eigen::VectorXd& x) const {
    Eigen::VectorXd dx(dimension);
    rhs(x, dx);
    return dx;
}

Eigen::MatrixXd NonlinearModel::finite_difference_jacobian(const Eigen::VectorXd& x,
                                                           double step) const {
    Eigen::MatrixXd j(dimension, dimension);
    Eigen::VectorXd xp = x;
    Eigen::VectorXd fp(dimension);
    Eigen::VectorXd fm(dimension);
    for (Eigen::Index k = 0; k < dimension; ++k) {
        const double h = step * std::max(1.0, std::abs(x(k)));
        xp(k) = x(k) + h;
        rhs(xp, fp);
        xp(k) = x(k) - h;
        rhs(xp, fm);
        xp(k) = x(k);
        j.col(k) = (fp - fm) / (2.0 * h);
    }
    return j;
}

Eigen::MatrixXd NonlinearModel::jacobian_at(const Eigen::VectorXd& x) const {
    if (!jacobian) return finite_difference_jacobian(x);
    Eigen::MatrixXd j(dimension, dimension);
    jacobian(x, j);
    return j;
}

double NonlinearModel::residual(const Eigen::VectorXd& x) const {
    return eval(x).lpNorm<Eigen::Infinity>();
}

double NonlinearModel::scaled_residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd f = eval(x);
    for (Eigen::Index k = 0; k < dimension; ++k) {
        const double tc = labels[static_cast<std::size_t>(k)].time_constant;
        if (tc > 0.0) f(k) *= tc;
    }
    return f.lpNorm<Eigen::Infinity>();
}

void Microgrid::validate() const {
    network.validate();
    if (inverters.size() != network.inverter_nodes.size()) {
        throw TopologyError("inverter count does not match the network's inverter nodes");
    }
    for (std::size_t i = 0; i < inverters.size(); ++i) {
        if (inverters[i].node != network.inverter_nodes[i]) {
            throw TopologyError("inverter '" + inverters[i].node +
                                "' is not at inverter node position " + std::to_string(i));
        }
        inverters[i].validate();
    }
}

Microgrid with_gain_scale(const Microgrid& mg, double kp_factor, double kq_factor) {
    if (!(kp_factor > 0.0) || !(kq_factor > 0.0)) {
        throw DomainError("gain multipliers must be positive");
    }
    Microgrid out = mg;
    for (auto& inv : out.inverters) {
        inv.gains = scale_gains(inv.gains, kp_factor, kq_factor, mg.network.base.w0);
    }
    return out;
}

GbCorrection corrections_gb(double r, double x, double w0) {
    if (!(r + x > 0.0)) throw DomainError("corrections_gb needs r + x > 0");
    const double z2 = r * r + x * x;
    const double l = x / w0;
    return {l * (r * r - x * x) / (z2 * z2), 2.0 * r * l * x / (z2 * z2)};
}

Microgrid twobus_microgrid(const TwoBusParams& params) {
    Microgrid mg;
    mg.network.base.w0 = params.w0;
    mg.network.inverter_nodes = {params.inverter.node};
    mg.network.stiff_buses = {StiffBus{"grid", params.us}};
    mg.network.branches = {Branch{params.inverter.node, "grid", params.r, params.x}};
    mg.inverters = {params.inverter};
    return mg;
}

namespace {

std::vector<StateLabel> inverter_labels(const DroopInverter& inv) {
    return {{StateKind::angle, inv.node, 0.0},
            {StateKind::frequency, inv.node, inv.tau},
            {StateKind::voltage, inv.node, inv.tau}};
}

InverterTap twobus_tap(const DroopInverter& inv, double p0, double q0) {
    InverterTap t;
    t.node = inv.node;
    t.theta = 0;
    t.omega = 1;
    t.voltage = 2;
    t.mp = inv.gains.mp;
    t.nq = inv.gains.nq;
    t.tau = inv.tau;
    t.dw_set = inv.gains.mp * p0;
    t.u_set = 1.0 + inv.gains.nq * q0;
    return t;
}

struct TwoBusFullData {
    double r, x, l, us, tau, mp, nq, dw_set, u_set;
};

void twobus_full_rhs(const TwoBusFullData& d, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    const double th = s(0), om = s(1), u = s(2), id = s(3), iq = s(4);
    const double c = std::cos(th), sn = std::sin(th);
    const double p = u * c * id + u * sn * iq;
    const double q = u * sn * id - u * c * iq;
    ds(0) = om;
    ds(1) = (d.dw_set - om - d.mp * p) / d.tau;
    ds(2) = (d.u_set - u - d.nq * q) / d.tau;
    ds(3) = (u * c - d.us - d.r * id + d.x * iq) / d.l;
    ds(4) = (u * sn - d.r * iq - d.x * id) / d.l;
}

void twobus_full_jacobian(const TwoBusFullData& d, const Eigen::VectorXd& s, Eigen::MatrixXd& j) {
    const double th = s(0), u = s(2), id = s(3), iq = s(4);
    const double c = std::cos(th), sn = std::sin(th);
    // dP and dQ with respect to (theta, U, Id, Iq)
    const double p_th = -u * sn * id + u * c * iq;
    const double p_u = c * id + sn * iq;
    const double q_th = u * c * id + u * sn * iq;
    const double q_u = sn * id - c * iq;
    j.setZero(5, 5);
    j(0, 1) = 1.0;
    j(1, 0) = -d.mp * p_th / d.tau;
    j(1, 1) = -1.0 / d.tau;
    j(1, 2) = -d.mp * p_u / d.tau;
    j(1, 3) = -d.mp * u * c / d.tau;
    j(1, 4) = -d.mp * u * sn / d.tau;
    j(2, 0) = -d.nq * q_th / d.tau;
    j(2, 2) = (-1.0 - d.nq * q_u) / d.tau;
    j(2, 3) = -d.nq * u * sn / d.tau;
    j(2, 4) = d.nq * u * c / d.tau;
    j(3, 0) = -u * sn / d.l;
    j(3, 2) = c / d.l;
    j(3, 3) = -d.r / d.l;
    j(3, 4) = d.x / d.l;
    j(4, 0) = u * c / d.l;
    j(4, 2) = sn / d.l;
    j(4, 3) = -d.x / d.l;
    j(4, 4) = -d.r / d.l;
}

TwoBusModel build_twobus_full(const TwoBusParams& p) {
    const auto& inv = p.inverter;
    const Complex i0 = (1.0 - p.us) / Complex(p.r, p.x);
    const Complex s0 = std::conj(i0);  // V = 1
    const auto sp = backsolve_setpoints(inv, s0.real(), s0.imag(), p.w0);

    auto data = std::make_shared<TwoBusFullData>(TwoBusFullData{
        p.r, p.x, p.x / p.w0, p.us, inv.tau, inv.gains.mp, inv.gains.nq, sp.w_set - p.w0, sp.u_set});

    Eigen::VectorXd eq(5);
    eq << 0.0, 0.0, 1.0, i0.real(), i0.imag();

    std::vector<StateLabel> labels = inverter_labels(inv);
    const std::string line = inv.node + "->grid";
    labels.push_back({StateKind::current_d, line, p.x / p.w0});
    labels.push_back({StateKind::current_q, line, p.x / p.w0});

    TwoBusModel m;
    auto& nl = m.nonlinear;
    nl.dimension = 5;
    nl.kind = ModelKind::full;
    nl.w0 = p.w0;
    nl.labels = labels;
    nl.taps = {twobus_tap(inv, s0.real(), s0.imag())};
    nl.equilibrium = eq;
    nl.rhs = [data](const Eigen::VectorXd& s, Eigen::VectorXd& ds) { twobus_full_rhs(*data, s, ds); };
    nl.jacobian = [data](const Eigen::VectorXd& s, Eigen::MatrixXd& j) {
        twobus_full_jacobian(*data, s, j);
    };

    auto& lin = m.linear;
    lin.kind = ModelKind::full;
    lin.labels = labels;
    lin.operating_point = eq;
    lin.taps = nl.taps;
    lin.w0 = p.w0;
    lin.a = nl.jacobian_at(eq);
    return m;
}

}  // namespace

TwoBusModel build_twobus(ModelKind kind, const TwoBusParams& p) {
    p.inverter.validate();
    if (!(p.w0 > 0.0)) throw DomainError("two-bus model needs w0 > 0");
    if (p.r < 0.0 || p.x < 0.0 || !(p.r + p.x > 0.0)) {
        throw DomainError("two-bus connection needs r, x >= 0 and r + x > 0");
    }
    if (kind == ModelKind::full) return build_twobus_full(p);

    const auto& inv = p.inverter;
    const double z2 = p.r * p.r + p.x * p.x;
    const double b = p.us * p.x / z2;
    const double g = p.us * p.r / z2;
    GbCorrection corr{};
    if (kind == ModelKind::hifi3) corr = corrections_gb(p.r, p.x, p.w0);

    const double lp = 1.0 / inv.gains.mp;
    const double lq = 1.0 / inv.gains.nq;
    const double m_rho = inv.tau * lq - corr.b_prime;
    if (std::abs(m_rho) <= 1e-12 * std::max(inv.tau * lq, std::abs(corr.b_prime))) {
        std::ostringstream os;
        os << "singular mass matrix: tau*lambda_q - B' = " << m_rho << " (tau*lambda_q = "
           << inv.tau * lq << ", B' = " << corr.b_prime << ")";
        throw ModelError(os.str());
    }

    Eigen::Matrix3d m;
    m << 1.0, 0.0, 0.0,
         0.0, inv.tau * lp, -corr.g_prime,
         0.0, 0.0, m_rho;
    Eigen::Matrix3d k;
    k << 0.0, 1.0, 0.0,
         -b, -(lp - corr.b_prime), -g,
         g, -corr.g_prime, -(lq + b);

    TwoBusModel out;
    auto& lin = out.linear;
    lin.kind = kind;
    lin.a = m.partialPivLu().solve(k);
    lin.labels = inverter_labels(inv);
    lin.operating_point = Eigen::Vector3d(0.0, 0.0, 1.0);
    const Complex s0 = std::conj((1.0 - p.us) / Complex(p.r, p.x));
    lin.taps = {twobus_tap(inv, s0.real(), s0.imag())};
    lin.w0 = p.w0;

    out.nonlinear = build_network_reduced_nonlinear(twobus_microgrid(p), kind);
    return out;
}

LinearStateSpace build_linear(const Microgrid& mg, ModelKind kind, const FullModelOptions& options) {
    if (kind == ModelKind::full) return build_network_full(mg, options).linear;
    return build_network_reduced(mg, kind);
}

NonlinearModel build_nonlinear(const Microgrid& mg, ModelKind kind,
                               const FullModelOptions& options) {
    if (kind == ModelKind::full) return build_network_full(mg, options).nonlinear;
    ReducedOptions ro;
    ro.setpoints = options.setpoints;
    return build_network_reduced_nonlinear(mg, kind, ro);
}

}  // namespace mgmor
