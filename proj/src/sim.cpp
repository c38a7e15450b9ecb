#include "mgmor/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgmor/error.hpp"

namespace mgmor {

std::string_view to_string(Solver s) { return s == Solver::dopri45 ? "dopri45" : "trbdf2"; }

Solver parse_solver(std::string_view name) {
    if (name == "dopri45" || name == "explicit" || name == "explicit-adaptive") return Solver::dopri45;
    if (name == "trbdf2" || name == "implicit" || name == "implicit-trapezoidal") return Solver::trbdf2;
    throw DomainError("unknown solver '" + std::string(name) + "' (expected dopri45 or trbdf2)");
}

namespace {

double weighted_rms(const Eigen::VectorXd& e, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                    double atol, double rtol) {
    if (e.size() == 0) return 0.0;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = e(i) / sc;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(e.size()));
}

struct Recorder {
    const IntegrateOptions& opt;
    double t_end;
    std::vector<double> t;
    std::vector<Eigen::VectorXd> rows;
    bool diverged = false;
    long divergence_index = -1;

    // Returns false when integration must stop.
    bool push(double time, const Eigen::VectorXd& y) {
        const bool bad = !y.allFinite() || y.cwiseAbs().maxCoeff() > opt.divergence_threshold;
        if (!opt.store_states && rows.size() >= 2) {
            t.back() = time;
            rows.back() = y;
        } else {
            t.push_back(time);
            rows.push_back(y);
        }
        if (bad) {
            diverged = true;
            divergence_index = static_cast<long>(rows.size()) - 1;
            return false;
        }
        return true;
    }
};

void check_step(double h, double t) {
    if (!(h > 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1e-3))) {
        std::ostringstream os;
        os << "step size underflow at t = " << t;
        throw IntegrationError(os.str(), t);
    }
}

double initial_step(const NonlinearModel& m, const Eigen::VectorXd& y, const Eigen::VectorXd& f0,
                    double span, int order, const IntegrateOptions& opt, std::size_t& nfev) {
    if (opt.initial_step > 0.0) return std::min(opt.initial_step, span);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(y.size());
    const double d0 = weighted_rms(y, y, y, opt.abs_tol, opt.rel_tol);
    const double d1 = weighted_rms(f0, y, y, opt.abs_tol, opt.rel_tol);
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const Eigen::VectorXd y1 = y + h0 * f0;
    Eigen::VectorXd f1(y.size());
    m.rhs(y1, f1);
    ++nfev;
    const double d2 = weighted_rms(f1 - f0, y, y, opt.abs_tol, opt.rel_tol) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / (order + 1));
    return std::min({100.0 * h0, h1, span});
}

struct Counters {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t nfev = 0;
    std::size_t njev = 0;
    std::size_t factorizations = 0;
};

void run_dopri(const NonlinearModel& m, Eigen::VectorXd y, double t0, double t_end,
               const IntegrateOptions& opt, Recorder& rec, Counters& c) {
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
    const auto n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y5(n);
    m.rhs(y, k1);
    ++c.nfev;
    const bool fixed = opt.fixed_step > 0.0;
    double h = fixed ? opt.fixed_step : initial_step(m, y, k1, t_end - t0, 4, opt, c.nfev);
    double t = t0;
    std::size_t steps = 0;
    while (t < t_end) {
        if (++steps > opt.max_steps) {
            std::ostringstream os;
            os << "step budget of " << opt.max_steps << " exhausted at t = " << t;
            throw IntegrationError(os.str(), t);
        }
        const bool last = t + h >= t_end * (1.0 - 1e-14);
        if (last) h = t_end - t;
        check_step(h, t);
        yt = y + h * a21 * k1;
        m.rhs(yt, k2);
        yt = y + h * (a31 * k1 + a32 * k2);
        m.rhs(yt, k3);
        yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        m.rhs(yt, k4);
        yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        m.rhs(yt, k5);
        yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        m.rhs(yt, k6);
        y5 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        m.rhs(y5, k7);
        c.nfev += 6;
        double err = 0.0;
        if (!fixed) {
            const Eigen::VectorXd est = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = weighted_rms(est, y, y5, opt.abs_tol, opt.rel_tol);
            if (!std::isfinite(err)) err = 1e10;
        }
        if (err <= 1.0) {
            t = last ? t_end : t + h;
            y = y5;
            k1 = k7;
            ++c.accepted;
            if (!rec.push(t, y)) return;
            if (!fixed) h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        } else {
            ++c.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
}

void run_trbdf2(const NonlinearModel& m, Eigen::VectorXd y, double t0, double t_end,
                const IntegrateOptions& opt, Recorder& rec, Counters& c) {
    const double gamma = 2.0 - std::sqrt(2.0);
    const double d = gamma / 2.0;
    const double c1 = 1.0 / (gamma * (2.0 - gamma));
    const double c0 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
    const double lte = (-3.0 * gamma * gamma + 4.0 * gamma - 2.0) / (12.0 * (2.0 - gamma));
    const int max_newton = 8;
    const double newton_tol = 0.03;

    const auto n = y.size();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd f0(n), f1(n), f2(n), z(n), z2(n), r(n), fz(n), rhs(n);
    m.rhs(y, f0);
    ++c.nfev;
    const bool fixed = opt.fixed_step > 0.0;
    double h = fixed ? opt.fixed_step : initial_step(m, y, f0, t_end - t0, 2, opt, c.nfev);

    Eigen::MatrixXd jac;
    bool jac_fresh = false;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    double h_factored = -1.0;
    auto refresh_jacobian = [&] {
        jac = m.jacobian_at(y);
        ++c.njev;
        jac_fresh = true;
        h_factored = -1.0;
    };
    refresh_jacobian();

    // Simplified Newton on z - d h f(z) = b. Returns false on divergence.
    auto solve_stage = [&](Eigen::VectorXd& zz, const Eigen::VectorXd& b) {
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < max_newton; ++it) {
            m.rhs(zz, fz);
            ++c.nfev;
            r = b - (zz - d * h * fz);
            const Eigen::VectorXd dz = lu.solve(r);
            zz += dz;
            const double nrm = weighted_rms(dz, y, zz, opt.abs_tol, opt.rel_tol);
            if (!std::isfinite(nrm)) return false;
            if (nrm <= newton_tol) return true;
            if (it > 0 && nrm > 0.9 * prev) return false;
            prev = nrm;
        }
        return false;
    };

    double t = t0;
    std::size_t steps = 0;
    while (t < t_end) {
        if (++steps > opt.max_steps) {
            std::ostringstream os;
            os << "step budget of " << opt.max_steps << " exhausted at t = " << t;
            throw IntegrationError(os.str(), t);
        }
        const bool last = t + h >= t_end * (1.0 - 1e-14);
        const double h_plan = h;
        if (last) h = t_end - t;
        check_step(h, t);
        if (h != h_factored) {
            lu.compute(eye - d * h * jac);
            ++c.factorizations;
            h_factored = h;
        }

        bool ok = true;
        rhs = y + d * h * f0;
        z = y + gamma * h * f0;
        ok = solve_stage(z, rhs);
        if (ok) {
            f1 = (z - rhs) / (d * h);
            rhs = c1 * z - c0 * y;
            z2 = z + (1.0 - gamma) * h * f1;
            ok = solve_stage(z2, rhs);
        }
        if (!ok) {
            if (fixed && jac_fresh) {
                throw IntegrationError("Newton iteration failed at fixed step size", t);
            }
            if (!jac_fresh) {
                refresh_jacobian();
            } else {
                h *= 0.25;
                ++c.rejected;
            }
            continue;
        }
        f2 = (z2 - rhs) / (d * h);

        double err = 0.0;
        if (!fixed) {
            Eigen::VectorXd est = 2.0 * lte * h * ((f2 - f1) / (1.0 - gamma) - (f1 - f0) / gamma);
            est = lu.solve(est);
            err = weighted_rms(est, y, z2, opt.abs_tol, opt.rel_tol);
            if (!std::isfinite(err)) err = 1e10;
        }
        if (err <= 1.0) {
            t = last ? t_end : t + h;
            y = z2;
            f0 = f2;
            jac_fresh = false;
            ++c.accepted;
            if (!rec.push(t, y)) return;
            if (!fixed) {
                const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -1.0 / 3.0), 0.2, 5.0);
                const double base = last ? h_plan : h;
                if (fac < 1.0 || fac > 1.2) h = base * fac;
                else h = base;
            }
        } else {
            ++c.rejected;
            h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0));
        }
    }
}

Trajectory integrate_span(const NonlinearModel& model, const Eigen::VectorXd& x0, double t0,
                          double t_end, const IntegrateOptions& opt) {
    if (!model.rhs) throw IntegrationError("model has no right-hand side", t0);
    if (x0.size() != model.dimension) throw DomainError("initial state has the wrong dimension");
    if (!(t_end > t0)) throw DomainError("t_end must exceed the start time");
    if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw DomainError("tolerances must be positive");
    if (!x0.allFinite()) throw DomainError("initial state is not finite");

    Recorder rec{opt, t_end, {}, {}, false, -1};
    Counters c;
    rec.push(t0, x0);
    if (!rec.diverged) {
        if (opt.solver == Solver::dopri45) {
            run_dopri(model, x0, t0, t_end, opt, rec, c);
        } else {
            run_trbdf2(model, x0, t0, t_end, opt, rec, c);
        }
    }

    Trajectory tr;
    tr.t = std::move(rec.t);
    tr.labels = model.labels;
    tr.diverged = rec.diverged;
    tr.divergence_index = rec.divergence_index;
    tr.accepted = c.accepted;
    tr.rejected = c.rejected;
    tr.rhs_evaluations = c.nfev;
    tr.jacobian_evaluations = c.njev;
    tr.factorizations = c.factorizations;
    const auto rows = static_cast<Eigen::Index>(rec.rows.size());
    tr.states.resize(rows, model.dimension);
    for (Eigen::Index k = 0; k < rows; ++k) tr.states.row(k) = rec.rows[static_cast<std::size_t>(k)].transpose();
    for (const auto& tap : model.taps) tr.inverters.push_back(tap.node);
    if (opt.compute_outputs) {
        const auto ni = static_cast<Eigen::Index>(model.taps.size());
        tr.p.resize(rows, ni);
        tr.q.resize(rows, ni);
        tr.omega.resize(rows, ni);
        tr.u.resize(rows, ni);
        Eigen::VectorXd dx(model.dimension);
        for (Eigen::Index k = 0; k < rows; ++k) {
            const Eigen::VectorXd x = tr.states.row(k).transpose();
            if (x.allFinite()) {
                model.rhs(x, dx);
            } else {
                dx.setConstant(std::numeric_limits<double>::quiet_NaN());
            }
            for (Eigen::Index i = 0; i < ni; ++i) {
                const auto o = inverter_outputs(model.taps[static_cast<std::size_t>(i)], model.w0, x, dx);
                tr.p(k, i) = o.p;
                tr.q(k, i) = o.q;
                tr.omega(k, i) = o.omega;
                tr.u(k, i) = o.u;
            }
        }
    }
    return tr;
}

void append_rows(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src, Eigen::Index skip) {
    if (src.rows() <= skip) return;
    const auto old = dst.rows();
    Eigen::MatrixXd out(old + src.rows() - skip, src.cols());
    if (old) out.topRows(old) = dst;
    out.bottomRows(src.rows() - skip) = src.bottomRows(src.rows() - skip);
    dst = std::move(out);
}

}  // namespace

Trajectory integrate(const NonlinearModel& model, const Eigen::VectorXd& x0, double t_end,
                     const IntegrateOptions& opt) {
    return integrate_span(model, x0, 0.0, t_end, opt);
}

NonlinearModel as_nonlinear(const LinearStateSpace& ss) {
    NonlinearModel nl;
    nl.dimension = ss.a.rows();
    nl.kind = ss.kind;
    nl.labels = ss.labels;
    nl.taps = ss.taps;
    nl.w0 = ss.w0;
    nl.equilibrium = ss.operating_point.size() == ss.a.rows() ? ss.operating_point
                                                              : Eigen::VectorXd::Zero(ss.a.rows());
    const Eigen::MatrixXd a = ss.a;
    const Eigen::VectorXd op = nl.equilibrium;
    nl.rhs = [a, op](const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx.noalias() = a * (x - op); };
    nl.jacobian = [a](const Eigen::VectorXd&, Eigen::MatrixXd& j) { j = a; };
    return nl;
}

Trajectory integrate(const LinearStateSpace& ss, const Eigen::VectorXd& x0, double t_end,
                     const IntegrateOptions& opt) {
    return integrate(as_nonlinear(ss), x0, t_end, opt);
}

Trajectory integrate_piecewise(const std::vector<NonlinearModel>& models,
                               const std::vector<double>& switch_times, const Eigen::VectorXd& x0,
                               double t_end, const IntegrateOptions& opt) {
    if (models.empty()) throw DomainError("piecewise integration needs at least one model");
    if (switch_times.size() + 1 != models.size()) {
        throw DomainError("need one switch time between consecutive models");
    }
    double prev = 0.0;
    for (double s : switch_times) {
        if (!(s > prev) || !(s < t_end)) throw DomainError("switch times must increase inside (0, t_end)");
        prev = s;
    }
    Trajectory out;
    Eigen::VectorXd x = x0;
    double t0 = 0.0;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].dimension != models.front().dimension) {
            throw DomainError("piecewise models must share a state layout");
        }
        const double t1 = k < switch_times.size() ? switch_times[k] : t_end;
        const Trajectory seg = integrate_span(models[k], x, t0, t1, opt);
        const Eigen::Index skip = k == 0 ? 0 : 1;
        if (k == 0) {
            out.labels = seg.labels;
            out.inverters = seg.inverters;
        }
        const auto offset = static_cast<long>(out.t.size());
        out.t.insert(out.t.end(), seg.t.begin() + skip, seg.t.end());
        append_rows(out.states, seg.states, skip);
        append_rows(out.p, seg.p, skip);
        append_rows(out.q, seg.q, skip);
        append_rows(out.omega, seg.omega, skip);
        append_rows(out.u, seg.u, skip);
        out.accepted += seg.accepted;
        out.rejected += seg.rejected;
        out.rhs_evaluations += seg.rhs_evaluations;
        out.jacobian_evaluations += seg.jacobian_evaluations;
        out.factorizations += seg.factorizations;
        if (seg.diverged) {
            out.diverged = true;
            out.divergence_index = offset + seg.divergence_index - skip;
            break;
        }
        x = seg.final_state();
        t0 = t1;
    }
    return out;
}

Eigen::VectorXd perturb_state(const Eigen::VectorXd& x0, Eigen::Index index, double delta) {
    if (index < 0 || index >= x0.size()) throw DomainError("perturbation index out of range");
    Eigen::VectorXd x = x0;
    x(index) += delta;
    return x;
}

Eigen::VectorXd angle_kick(const NonlinearModel& model, const std::string& node, double delta) {
    for (const auto& tap : model.taps) {
        if (tap.node == node) return perturb_state(model.equilibrium, tap.theta, delta);
    }
    throw DomainError("no inverter '" + node + "' in the model");
}

Microgrid scale_load(const Microgrid& mg, const std::string& bus, double factor) {
    if (!(factor > 0.0)) throw DomainError("load scale factor must be positive");
    Microgrid out = mg;
    bool found = false;
    for (auto& ld : out.network.loads) {
        if (ld.bus != bus) continue;
        ld.r /= factor;
        ld.x /= factor;
        found = true;
    }
    if (!found) throw DomainError("no load at bus '" + bus + "'");
    return out;
}

NonlinearModel rebuild_with_setpoints(const Microgrid& mg, ModelKind kind, const NonlinearModel& before,
                                      const FullModelOptions& options) {
    std::vector<Setpoints> sp;
    for (const auto& tap : before.taps) sp.push_back({tap.dw_set + before.w0, tap.u_set});
    FullModelOptions opt = options;
    opt.setpoints = sp;
    return build_nonlinear(mg, kind, opt);
}

}  // namespace mgmor
