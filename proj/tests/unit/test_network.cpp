#include <complex>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mgmor/error.hpp"
#include "mgmor/network.hpp"

using namespace mgmor;
using C = std::complex<double>;

namespace {

void check_complex(C got, C want, double tol) {
    CHECK(std::abs(got - want) <= tol * std::abs(want));
}

Eigen::MatrixXcd reduced_at(const NetworkSpec& net, C s) {
    const Eigen::MatrixXcd y = nodal_admittance(net, s);
    const auto k = static_cast<Eigen::Index>(net.port_count());
    const auto m = y.rows() - k;
    return y.topLeftCorner(k, k) -
           y.topRightCorner(k, m) * y.bottomRightCorner(m, m).partialPivLu().solve(y.bottomLeftCorner(m, k));
}

bool positive_definite(const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (a + a.transpose()));
    return llt.info() == Eigen::Success;
}

}  // namespace

TEST_CASE("branch admittance and derivative") {
    const double w0 = 314.0;
    const C y = branch_admittance(0.1, 0.2, C(0.0, 0.0), w0);
    check_complex(y, 1.0 / C(0.1, 0.2), 1e-15);
    const C s(3.0, -2.0);
    const double h = 1e-4;
    const C fd = (branch_admittance(0.1, 0.2, s + h, w0) - branch_admittance(0.1, 0.2, s - h, w0)) / (2.0 * h);
    check_complex(branch_admittance_derivative(0.1, 0.2, s, w0), fd, 1e-8);
}

TEST_CASE("two-bus structure matrices") {
    const auto mg = twobus_microgrid(testing::twobus(1.0));
    const auto adm = assemble_taylor(mg.network);
    const auto sm = structure_matrices(adm);
    // Single inverter against a stiff bus: the whole admittance is network part.
    CHECK(sm.b(0, 0) == doctest::Approx(55.992795526256984).epsilon(1e-12));
    CHECK(sm.g(0, 0) == doctest::Approx(56.97535692392868).epsilon(1e-12));
    CHECK(std::abs(sm.b_shunt(0, 0)) < 1e-12);
    CHECK(std::abs(sm.g_shunt(0, 0)) < 1e-12);
    const auto p = testing::twobus(1.0);
    const auto corr = corrections_gb(p.r, p.x, p.w0);
    CHECK(sm.b_prime(0, 0) == doctest::Approx(corr.b_prime).epsilon(1e-12));
    CHECK(sm.g_prime(0, 0) == doctest::Approx(corr.g_prime).epsilon(1e-12));
}

TEST_CASE("cascade Kron-reduced admittance pair against reference") {
    const auto mg = make_cascade(5);
    const auto adm = assemble_taylor(mg.network);
    const C y0d[] = {{17.335317762218935, -11.57002775976298}, {31.85478693110731, -25.797763932297386},
                     {36.50233708277787, -32.93014687323057},  {33.2399426035072, -28.68142271260041},
                     {15.478688954880724, -9.626875307165278}};
    const C y1d[] = {{-0.0123545049971104, 0.03428343697938392},
                     {-0.014971866069283616, 0.08018142889909541},
                     {-0.008800335782173836, 0.103400870524221},
                     {-0.011912758417054192, 0.08962592475351508},
                     {-0.01167139831063461, 0.027947410776126464}};
    for (int k = 0; k < 5; ++k) {
        check_complex(adm.y0(k, k), y0d[k], 1e-10);
        check_complex(adm.y1(k, k), y1d[k], 1e-7);
    }
    check_complex(adm.y0(0, 1), {-13.954253471359412, 11.729800369808657}, 1e-10);
    check_complex(adm.y0(1, 3), {-3.1938601274678167, 0.44310919381583336}, 1e-10);
    check_complex(adm.y1(0, 1), {0.007098418757974419, -0.03667456659635822}, 1e-7);
    check_complex(adm.y1(2, 4), {0.005630240111835031, 0.0008726442047510274}, 1e-6);
}

TEST_CASE("derivative Kron rule matches finite differences of the reduced matrix") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        NetworkSpec net;
        net.base.w0 = 314.0;
        const int n = 2 + trial % 3;
        const int m = 2 + trial % 4;
        for (int i = 0; i < n; ++i) net.inverter_nodes.push_back("i" + std::to_string(i));
        for (int j = 0; j < m; ++j) net.buses.push_back("b" + std::to_string(j));
        for (int i = 0; i < n; ++i) net.branches.push_back({net.inverter_nodes[i], net.buses[i % m], u(rng), u(rng)});
        for (int j = 1; j < m; ++j) net.branches.push_back({net.buses[j - 1], net.buses[j], u(rng), u(rng)});
        for (int j = 0; j < m; ++j) net.loads.push_back({net.buses[j], 1.0 + u(rng), u(rng)});
        if (trial % 2) net.stiff_buses.push_back({"g", 1.0});
        if (trial % 2) net.branches.push_back({net.buses[m - 1], "g", u(rng), u(rng)});

        const auto adm = assemble_taylor(net);
        const double h = 1e-3;
        const Eigen::MatrixXcd d1 = (reduced_at(net, h) - reduced_at(net, -h)) / (2.0 * h);
        const Eigen::MatrixXcd d2 = (reduced_at(net, h / 2) - reduced_at(net, -h / 2)) / h;
        const Eigen::MatrixXcd fd = (4.0 * d2 - d1) / 3.0;
        CHECK((adm.port_y1 - fd).norm() <= 1e-7 * fd.norm());
        CHECK((adm.port_y0 - reduced_at(net, 0.0)).norm() <= 1e-12 * adm.port_y0.norm());
    }
}

TEST_CASE("structure invariants on the cascade") {
    const auto mg = make_cascade(5);
    const auto sm = structure_matrices(assemble_taylor(mg.network));
    const auto n = sm.b.rows();
    CHECK((sm.b - sm.b.transpose()).norm() < 1e-10 * sm.b.norm());
    CHECK((sm.g - sm.g.transpose()).norm() < 1e-10 * sm.g.norm());
    CHECK(sm.b.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10 * sm.b.norm());
    CHECK(sm.g.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10 * sm.g.norm());
    for (const Eigen::MatrixXd* mat : {&sm.b, &sm.g}) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*mat);
        const auto& ev = es.eigenvalues();
        CHECK(std::abs(ev(0)) < 1e-9 * ev(n - 1));
        CHECK(ev(1) > 1e-6 * ev(n - 1));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(sm.g_shunt(i, i) > 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                CHECK(sm.b_shunt(i, j) == 0.0);
                CHECK(sm.g_shunt(i, j) == 0.0);
            }
        }
    }
    CHECK(positive_definite(sm.b_prime));
}

TEST_CASE("shunt parts are non-negative when loads sit at inverter terminals") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        NetworkSpec net;
        net.base.w0 = 314.0;
        const int n = 2 + trial % 5;
        for (int i = 0; i < n; ++i) net.inverter_nodes.push_back("i" + std::to_string(i));
        for (int i = 1; i < n; ++i) net.branches.push_back({net.inverter_nodes[i - 1], net.inverter_nodes[i], u(rng), u(rng)});
        for (int i = 0; i < n; ++i) net.loads.push_back({net.inverter_nodes[i], 1.0 + u(rng), u(rng)});
        const auto sm = structure_matrices(assemble_taylor(net));
        for (int i = 0; i < n; ++i) {
            CHECK(sm.b_shunt(i, i) > 0.0);
            CHECK(sm.g_shunt(i, i) > 0.0);
        }
        CHECK(sm.b_prime.llt().info() == Eigen::Success);
    }
}

TEST_CASE("topology validation") {
    NetworkSpec net;
    net.inverter_nodes = {"a", "b"};
    net.buses = {"x"};
    net.branches = {{"a", "x", 0.1, 0.1}};
    CHECK_THROWS_AS(net.validate(), TopologyError);
    net.branches.push_back({"b", "x", 0.0, 0.0});
    CHECK_THROWS_AS(net.validate(), TopologyError);
    net.branches.back() = {"b", "x", -0.1, 0.1};
    CHECK_THROWS_AS(net.validate(), DomainError);
    net.branches.back() = {"b", "b", 0.1, 0.1};
    CHECK_THROWS_AS(net.validate(), TopologyError);
    net.branches.back() = {"b", "y", 0.1, 0.1};
    CHECK_THROWS_AS(net.validate(), TopologyError);
    net.branches.back() = {"b", "x", 0.1, 0.1};
    CHECK_NOTHROW(net.validate());
    net.buses.push_back("a");
    CHECK_THROWS_AS(net.validate(), TopologyError);
}
