#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mgmor/error.hpp"

using namespace mgmor;

TEST_CASE("table base matches reference constants") {
    const auto b = testing::table_base();
    CHECK(b.z_base == doctest::Approx(21.84049446).epsilon(1e-9));
    CHECK(b.w0 == doctest::Approx(2.0 * std::numbers::pi * 50.0));
    CHECK(b.i_base * b.u_base * 1.5 == doctest::Approx(b.s_base));
}

TEST_CASE("normalized droop gains") {
    const auto b = testing::table_base();
    const auto g = normalize_droops(9.3e-5, 1.3e-3, 1e4, b);
    CHECK(g.kp == doctest::Approx(0.002960281941509253).epsilon(1e-12));
    CHECK(g.kq == doctest::Approx(0.03406887153414749).epsilon(1e-12));
    CHECK(g.sn == doctest::Approx(1.0));
}

TEST_CASE("impedance conversion of coupling plus one km") {
    const auto b = testing::table_base();
    const auto z = impedance_to_pu(0.195, 0.61e-3, b);
    CHECK(z.r == doctest::Approx(0.00892836928930958).epsilon(1e-12));
    CHECK(z.x == doctest::Approx(0.008774396212501197).epsilon(1e-12));
}

TEST_CASE("round trips") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.1, 1000.0);
    for (int k = 0; k < 200; ++k) {
        const auto b = make_base(u(rng), u(rng) * 100.0, 50.0 + u(rng) / 100.0);
        const double v = u(rng);
        CHECK(b.impedance_from_pu(b.impedance_to_pu(v)) == doctest::Approx(v).epsilon(1e-13));
        CHECK(b.power_from_pu(b.power_to_pu(v)) == doctest::Approx(v).epsilon(1e-13));
        CHECK(b.voltage_from_pu(b.voltage_to_pu(v)) == doctest::Approx(v).epsilon(1e-13));
        CHECK(b.current_from_pu(b.current_to_pu(v)) == doctest::Approx(v).epsilon(1e-13));

        const double sn = u(rng) * 10.0;
        const auto g = normalize_droops(1e-4 * u(rng) / 100.0, 1e-3 * u(rng) / 100.0, sn, b);
        const auto h = gains_from_normalized(g.kp, g.kq, g.sn, b.w0);
        CHECK(h.mp == doctest::Approx(g.mp).epsilon(1e-12));
        CHECK(h.nq == doctest::Approx(g.nq).epsilon(1e-12));
        const auto s = scale_gains(g, 2.0, 0.5, b.w0);
        CHECK(s.kp == doctest::Approx(2.0 * g.kp));
        CHECK(s.nq == doctest::Approx(0.5 * g.nq));
    }
}

TEST_CASE("invalid bases and elements") {
    CHECK_THROWS_AS(make_base(0.0, 1e4, 50.0), DomainError);
    CHECK_THROWS_AS(make_base(381.58, -1.0, 50.0), DomainError);
    CHECK_THROWS_AS(make_base(381.58, 1e4, 0.0), DomainError);
    const auto b = testing::table_base();
    CHECK_THROWS_AS(impedance_to_pu(-1.0, 1e-3, b), DomainError);
    CHECK_THROWS_AS(impedance_to_pu(0.0, 0.0, b), DomainError);
    CHECK_THROWS_AS(normalize_droops(0.0, 1e-3, 1e4, b), DomainError);
    CHECK_THROWS_AS(gains_from_normalized(0.01, 0.0, 1.0, b.w0), DomainError);
}
