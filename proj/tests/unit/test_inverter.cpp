#include "doctest.h"
#include "helpers.hpp"
#include "mgmor/error.hpp"
#include "mgmor/inverter.hpp"

using namespace mgmor;

TEST_CASE("back-solved setpoints give a droop equilibrium") {
    const auto b = testing::table_base();
    auto inv = testing::table_inverter(b);
    const double p0 = 0.4, q0 = -0.1;
    const auto sp = backsolve_setpoints(inv, p0, q0, b.w0);
    inv.w_set = sp.w_set;
    inv.u_set = sp.u_set;
    const auto f = inverter_rhs(inv, b.w0, b.w0, 1.0, p0, q0);
    CHECK(f.norm() < 1e-12);
}

TEST_CASE("small-signal block is the derivative of the droop laws") {
    const auto b = testing::table_base();
    const auto inv = testing::table_inverter(b);
    const auto blk = inverter_block(inv);
    const double h = 1e-6;
    const double om = b.w0 + 0.3, u = 1.02, p = 0.2, q = 0.05;
    Eigen::Matrix<double, 3, 5> fd;
    const double base[5] = {0.0, om, u, p, q};
    for (int k = 0; k < 5; ++k) {
        double xp[5], xm[5];
        for (int j = 0; j < 5; ++j) xp[j] = xm[j] = base[j];
        xp[k] += h;
        xm[k] -= h;
        fd.col(k) = (inverter_rhs(inv, b.w0, xp[1], xp[2], xp[3], xp[4]) -
                     inverter_rhs(inv, b.w0, xm[1], xm[2], xm[3], xm[4])) / (2.0 * h);
    }
    CHECK((fd.block(0, 0, 3, 3) - blk.a).norm() < 1e-6 * blk.a.norm());
    CHECK((fd.block(0, 3, 3, 2) - blk.b).norm() < 1e-6 * blk.b.norm());
}

TEST_CASE("inverter validation") {
    const auto b = testing::table_base();
    auto inv = testing::table_inverter(b);
    CHECK_NOTHROW(inv.validate());
    auto bad = inv;
    bad.tau = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = inv;
    bad.coupling.x = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = inv;
    bad.gains.mp = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
