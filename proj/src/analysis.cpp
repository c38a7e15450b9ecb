#include "mgmor/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mgmor/error.hpp"

namespace mgmor {

Eigen::MatrixXd balance(const Eigen::MatrixXd& a, Eigen::VectorXd* scale) {
    const auto n = a.rows();
    Eigen::MatrixXd b = a;
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    constexpr double radix = 2.0;
    bool converged = false;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = b.col(i).cwiseAbs().sum() - std::abs(b(i, i));
            const double r = b.row(i).cwiseAbs().sum() - std::abs(b(i, i));
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            double cc = c;
            const double s = c + r;
            while (cc < g) {
                f *= radix;
                cc *= radix * radix;
            }
            g = r * radix;
            while (cc >= g) {
                f /= radix;
                cc /= radix * radix;
            }
            if ((cc + r) / f < 0.95 * s) {
                converged = false;
                d(i) *= f;
                b.row(i) /= f;
                b.col(i) *= f;
            }
        }
    }
    if (scale) *scale = d;
    return b;
}

EigenReport eigen_report(const Eigen::MatrixXd& a, double zero_tol) {
    if (a.rows() != a.cols()) throw AnalysisError("eigen_report needs a square matrix");
    if (!a.allFinite()) throw AnalysisError("state matrix contains non-finite entries");
    EigenReport rep;
    if (a.rows() == 0) return rep;
    Eigen::EigenSolver<Eigen::MatrixXd> es(balance(a), false);
    if (es.info() != Eigen::Success) throw AnalysisError("eigenvalue iteration did not converge");
    rep.eigenvalues = es.eigenvalues();
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
        const auto lam = rep.eigenvalues(i);
        if (std::abs(lam) < zero_tol) {
            ++rep.n_zero_modes;
            continue;
        }
        rep.abscissa = std::max(rep.abscissa, lam.real());
    }
    rep.stable = rep.abscissa < 0.0;
    return rep;
}

EigenReport eigen_report(const LinearStateSpace& ss, double zero_tol) {
    return eigen_report(ss.a, zero_tol);
}

std::string_view to_string(GainAxis axis) { return axis == GainAxis::kp ? "kp" : "kq"; }

GainAxis parse_gain_axis(std::string_view name) {
    if (name == "kp") return GainAxis::kp;
    if (name == "kq") return GainAxis::kq;
    throw DomainError("unknown gain axis '" + std::string(name) + "' (expected kp or kq)");
}

CriticalResult critical_parameter(const AbscissaFunction& f, double lo, double hi,
                                  const CriticalOptions& opt) {
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("critical search needs 0 < lo < hi");
    if (!(opt.rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
    CriticalResult res;
    auto unstable = [&](double p) {
        ++res.evaluations;
        return !(f(p) < 0.0);
    };
    const double f_lo = f(lo);
    ++res.evaluations;
    if (!(f_lo < 0.0)) {
        std::ostringstream os;
        os << "already unstable at the lower end " << lo << " of the bracket";
        throw BracketError(os.str(), f_lo, f(hi));
    }
    const int steps = std::max(opt.scan_points, 1);
    const double ratio = std::pow(hi / lo, 1.0 / steps);
    double a = lo;
    double b = lo;
    bool found = false;
    for (int k = 1; k <= steps; ++k) {
        b = k == steps ? hi : lo * std::pow(ratio, k);
        if (unstable(b)) {
            found = true;
            break;
        }
        a = b;
    }
    if (!found) {
        std::ostringstream os;
        os << "no loss of stability in [" << lo << ", " << hi << "]";
        throw BracketError(os.str(), f_lo, f(hi));
    }
    while ((b - a) > opt.rel_tol * a) {
        const double m = std::sqrt(a * b);
        if (unstable(m)) {
            b = m;
        } else {
            a = m;
        }
    }
    res.value = 0.5 * (a + b);
    res.lo = a;
    res.hi = b;
    return res;
}

GainModelBuilder gain_builder(const Microgrid& mg, ModelKind kind, const FullModelOptions& options) {
    mg.validate();
    if (mg.inverters.empty()) throw ModelError("microgrid has no inverters");
    const double kp_ref = mg.inverters.front().gains.kp;
    const double kq_ref = mg.inverters.front().gains.kq;
    return [mg, kind, options, kp_ref, kq_ref](double kp, double kq) {
        return build_linear(with_gain_scale(mg, kp / kp_ref, kq / kq_ref), kind, options);
    };
}

double abscissa_of(const GainModelBuilder& builder, double kp, double kq, double zero_tol) {
    try {
        return eigen_report(builder(kp, kq), zero_tol).abscissa;
    } catch (const ModelError&) {
        return std::numeric_limits<double>::infinity();
    }
}

CriticalResult critical_gain(const GainModelBuilder& builder, GainAxis axis, double other,
                             double lo, double hi, const CriticalOptions& opt, double zero_tol) {
    auto f = [&](double g) {
        return axis == GainAxis::kp ? abscissa_of(builder, g, other, zero_tol)
                                    : abscissa_of(builder, other, g, zero_tol);
    };
    return critical_parameter(f, lo, hi, opt);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

StabilityBoundary stability_region(const GainModelBuilder& builder, ModelKind kind,
                                   const std::vector<double>& kp, const std::vector<double>& kq,
                                   const RegionOptions& opt) {
    for (double v : kp) {
        if (!(v > 0.0)) throw DomainError("kp grid values must be positive");
    }
    for (double v : kq) {
        if (!(v > 0.0)) throw DomainError("kq grid values must be positive");
    }
    StabilityBoundary out;
    out.kind = kind;
    out.kp = kp;
    out.kq = kq;
    const std::size_t total = kp.size() * kq.size();
    out.abscissa.assign(total, 0.0);
    out.stable.assign(total, 0);

    unsigned nthreads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, std::max<std::size_t>(total, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nthreads);
    auto worker = [&](unsigned id) {
        try {
            for (std::size_t k = next++; k < total; k = next++) {
                const std::size_t row = k / kp.size();
                const std::size_t col = k % kp.size();
                const double a = abscissa_of(builder, kp[col], kq[row], opt.zero_tol);
                out.abscissa[k] = a;
                out.stable[k] = a < 0.0;
            }
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t row = 0; row < kq.size(); ++row) {
        for (std::size_t col = 0; col + 1 < kp.size(); ++col) {
            if (out.stable_at(row, col) == out.stable_at(row, col + 1)) continue;
            double a = kp[col];
            double b = kp[col + 1];
            const bool a_stable = out.stable_at(row, col);
            while (std::abs(b - a) > opt.rel_tol * std::min(a, b)) {
                const double m = 0.5 * (a + b);
                if ((abscissa_of(builder, m, kq[row], opt.zero_tol) < 0.0) == a_stable) {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.boundary.emplace_back(0.5 * (a + b), kq[row]);
        }
    }
    return out;
}

double bound_conventional(double r, double x, const DroopGains& gains, double tau, double us) {
    if (!(r >= 0.0) || !(x >= 0.0) || !(r + x > 0.0)) throw DomainError("bound needs r, x >= 0, not both 0");
    if (!(gains.nq > 0.0) || !(tau > 0.0)) throw DomainError("bound needs nq > 0 and tau > 0");
    const double z2 = r * r + x * x;
    const double b = us * x / z2;
    const double g = us * r / z2;
    if (g == 0.0) return std::numeric_limits<double>::infinity();
    const double lead = 1.0 + gains.nq * b;
    return lead * lead / (gains.nq * tau * g * g);
}

HifiBound bound_hifi(double r, double x, double sn, double tau, double w0, double u0) {
    if (!(r >= 0.0) || !(x >= 0.0)) throw DomainError("bound needs r, x >= 0");
    if (!(sn > 0.0) || !(tau > 0.0) || !(w0 > 0.0) || !(u0 > 0.0)) {
        throw DomainError("bound needs positive sn, tau, w0, u0");
    }
    if (r == 0.0 || x == 0.0) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    const double z2 = r * r + x * x;
    const double core = z2 * z2 / (2.0 * r * x * x);
    return {sn * core, tau * w0 * (sn / u0) * core};
}

}  // namespace mgmor
