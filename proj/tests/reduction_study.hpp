#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mgmor/reduction.hpp"

namespace testing {

/// Random two-timescale system with unit-order slow dynamics and a stable
/// fast block; gamma is eps on every fast state.
struct RandomTwoScale {
    Eigen::MatrixXd a_ss, a_sf, a_fs, a_ff;

    static RandomTwoScale draw(std::mt19937& rng, int ns, int nf) {
        std::normal_distribution<double> nd(0.0, 1.0);
        auto rnd = [&](int r, int c) {
            Eigen::MatrixXd m(r, c);
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j) m(i, j) = nd(rng);
            return m;
        };
        RandomTwoScale s;
        s.a_ss = rnd(ns, ns) / std::sqrt(double(ns));
        s.a_sf = rnd(ns, nf) / std::sqrt(double(nf));
        s.a_fs = rnd(nf, ns) / std::sqrt(double(ns));
        s.a_ff = -2.0 * Eigen::MatrixXd::Identity(nf, nf) + 0.5 * rnd(nf, nf) / std::sqrt(double(nf));
        return s;
    }

    mgmor::PartitionedLinear partitioned(double eps) const {
        mgmor::PartitionedLinear p;
        p.a_ss = a_ss;
        p.a_sf = a_sf;
        p.a_fs = a_fs;
        p.a_ff = a_ff;
        p.gamma = Eigen::VectorXd::Constant(a_ff.rows(), eps);
        return p;
    }

    Eigen::MatrixXd full(double eps) const {
        const auto ns = a_ss.rows(), nf = a_ff.rows();
        Eigen::MatrixXd a(ns + nf, ns + nf);
        a << a_ss, a_sf, a_fs / eps, a_ff / eps;
        return a;
    }
};

/// Largest distance between the reduced spectrum and the slow part of the
/// full spectrum, relative to the slow spectral radius.
inline double slow_eigen_error(const Eigen::MatrixXd& full, const Eigen::MatrixXd& reduced) {
    using C = std::complex<double>;
    const auto ns = reduced.rows();
    Eigen::VectorXcd ef = full.eigenvalues();
    std::vector<C> slow(ef.data(), ef.data() + ef.size());
    std::sort(slow.begin(), slow.end(), [](C a, C b) { return std::abs(a) < std::abs(b); });
    slow.resize(static_cast<std::size_t>(ns));
    Eigen::VectorXcd er = reduced.eigenvalues();
    double scale = 0.0;
    for (auto v : slow) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    std::vector<bool> used(slow.size(), false);
    for (Eigen::Index k = 0; k < er.size(); ++k) {
        std::size_t best = 0;
        double bd = INFINITY;
        for (std::size_t j = 0; j < slow.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(er(k) - slow[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, bd);
    }
    return worst / scale;
}

struct ScalingStudy {
    double slope_zero = 0.0;
    double slope_first = 0.0;
};

/// Least-squares log-log slopes of the median slow-eigenvalue error over
/// `systems` random draws.
inline ScalingStudy scaling_study(int systems, unsigned seed) {
    const std::vector<double> eps{4e-3, 2e-3, 1e-3, 5e-4};
    std::mt19937 rng(seed);
    std::vector<std::vector<double>> e0(eps.size()), e1(eps.size());
    for (int s = 0; s < systems; ++s) {
        const auto sys = RandomTwoScale::draw(rng, 3 + s % 4, 4 + s % 5);
        for (std::size_t k = 0; k < eps.size(); ++k) {
            const auto p = sys.partitioned(eps[k]);
            const Eigen::MatrixXd full = sys.full(eps[k]);
            e0[k].push_back(slow_eigen_error(full, mgmor::reduce_zero_order(p)));
            e1[k].push_back(slow_eigen_error(full, mgmor::reduce_first_order(p)));
        }
    }
    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    auto slope = [&](const std::vector<std::vector<double>>& e) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = double(eps.size());
        for (std::size_t k = 0; k < eps.size(); ++k) {
            const double x = std::log(eps[k]), y = std::log(median(e[k]));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    return {slope(e0), slope(e1)};
}

}  // namespace testing
