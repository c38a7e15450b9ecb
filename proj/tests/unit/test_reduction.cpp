#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mgmor/error.hpp"
#include "mgmor/reduction.hpp"
#include "reduction_study.hpp"

using namespace mgmor;

TEST_CASE("zero gamma: both orders equal the Schur complement") {
    std::mt19937 rng(3);
    for (int k = 0; k < 10; ++k) {
        const auto sys = testing::RandomTwoScale::draw(rng, 3, 4);
        const auto p = sys.partitioned(0.0);
        const Eigen::MatrixXd schur = sys.a_ss - sys.a_sf * sys.a_ff.inverse() * sys.a_fs;
        CHECK((reduce_zero_order(p) - schur).norm() < 1e-12 * schur.norm());
        CHECK((reduce_first_order(p) - schur).norm() < 1e-12 * schur.norm());
    }
}

TEST_CASE("first order error scales with the square of the time-scale ratio") {
    const auto st = testing::scaling_study(30, 99);
    CHECK(st.slope_zero == doctest::Approx(1.0).epsilon(0.2));
    CHECK(st.slope_first >= 1.8);
}

TEST_CASE("reduction commutes with slow similarity transforms") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int k = 0; k < 10; ++k) {
        const auto sys = testing::RandomTwoScale::draw(rng, 4, 5);
        auto p = sys.partitioned(1e-2);
        Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s(i, j) += 0.3 * (u(rng) - 1.25);
        const Eigen::MatrixXd si = s.inverse();
        const Eigen::MatrixXd r0 = reduce_first_order(p);
        p.a_ss = s * sys.a_ss * si;
        p.a_sf = s * sys.a_sf;
        p.a_fs = sys.a_fs * si;
        const Eigen::MatrixXd r1 = reduce_first_order(p);
        CHECK((r1 - s * r0 * si).norm() < 1e-10 * r0.norm());
    }
}

TEST_CASE("two-bus first-order reduction reproduces the corrected closed form") {
    for (double km : {0.5, 1.0, 4.0}) {
        const auto p = testing::twobus(km);
        const auto full = build_twobus(ModelKind::full, p).linear;
        const auto hifi = build_twobus(ModelKind::hifi3, p).linear;
        const auto simple = build_twobus(ModelKind::simple3, p).linear;
        const auto r1 = reduce(full, 1);
        const auto r0 = reduce(full, 0);
        CHECK((r1.a - hifi.a).norm() <= 1e-8 * hifi.a.norm());
        CHECK((r0.a - simple.a).norm() <= 1e-8 * simple.a.norm());
        CHECK(r1.kind == ModelKind::hifi3);
        CHECK(r1.labels.size() == 3);
        CHECK(r1.taps[0].voltage == 2);
    }
}

TEST_CASE("cascade reduction tracks the network builders") {
    const auto mg = make_cascade(5);
    const auto full = build_linear(mg, ModelKind::full);
    const auto r1 = reduce(full, 1);
    const auto hifi = build_linear(mg, ModelKind::hifi3);
    CHECK(r1.dimension() == 15);
    CHECK((r1.a - hifi.a).norm() < 1e-4 * hifi.a.norm());
    for (std::size_t k = 0; k < r1.labels.size(); ++k) CHECK(r1.labels[k].name() == hifi.labels[k].name());
}

TEST_CASE("singular fast block") {
    PartitionedLinear p;
    p.a_ss = Eigen::MatrixXd::Identity(2, 2);
    p.a_sf = Eigen::MatrixXd::Ones(2, 2);
    p.a_fs = Eigen::MatrixXd::Ones(2, 2);
    p.a_ff = Eigen::MatrixXd::Ones(2, 2);
    p.gamma = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(reduce_zero_order(p), ReductionError);
    CHECK_THROWS_AS(reduce_first_order(p), ReductionError);
    p.gamma = Eigen::VectorXd::Ones(3);
    p.a_ff = -Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(reduce_first_order(p), ReductionError);
    LinearStateSpace none;
    none.a = Eigen::MatrixXd::Identity(1, 1);
    none.labels = {{StateKind::angle, "x", 0.0}};
    CHECK_THROWS_AS(reduce(none, 1), ReductionError);
}
