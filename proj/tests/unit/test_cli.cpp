#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mgmor/commands.hpp"
#include "mgmor/error.hpp"
#include "mgmor/reduction.hpp"
#include "mgmor/scenario.hpp"

using namespace mgmor;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "mgmor_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string data(const std::string& file) { return std::string(MGMOR_DATA_DIR) + "/" + file; }

}  // namespace

TEST_CASE("data files match the bundled fixtures") {
    for (const auto& name : fixture_names()) {
        const auto a = parse_scenario(slurp(data(name + ".json")), name);
        const auto b = load_scenario(name);
        CHECK(emit_scenario(a) == emit_scenario(b));
    }
}

TEST_CASE("scenario round trip through emit") {
    const auto sc = load_scenario("table1_cascade");
    const auto again = parse_scenario(emit_scenario(sc));
    CHECK(emit_scenario(again) == emit_scenario(sc));
    const auto mg = to_microgrid(sc);
    CHECK(mg.inverters.size() == 5);
    CHECK(mg.network.buses.size() == 5);
}

TEST_CASE("twobus fixture collapses to one branch") {
    const auto mg = to_microgrid(load_scenario("twobus"));
    CHECK(mg.network.branches.size() == 1);
    CHECK(mg.network.buses.empty());
    CHECK(mg.network.stiff_buses.size() == 1);
}

TEST_CASE("zero-length branch merges buses") {
    auto sc = load_scenario("table1_cascade");
    ScenarioOverrides ov;
    ov.line_length_km = 0.0;
    const auto mg = to_microgrid(apply_overrides(sc, ov));
    CHECK(mg.network.buses.size() == 1);
    CHECK(mg.network.loads.size() == 5);
}

TEST_CASE("unknown key reports its path") {
    auto text = fixture_text("twobus");
    text.replace(text.find("\"wc\""), 4, "\"wq\"");
    try {
        parse_scenario(text, "bad.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("bad.json: /inverters/0/wq: unknown key") != std::string::npos);
    }
    const auto path = write_file("unknown.json", text);
    const auto r = run({"eig", path});
    CHECK(r.code == exit_error);
    CHECK(r.err.find("/inverters/0/wq") != std::string::npos);
}

TEST_CASE("malformed JSON reports line and column") {
    const std::string text = "{\n  \"name\": \"x\",\n  \"base\": {,}\n}\n";
    try {
        parse_scenario(text, "m.json");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).rfind("m.json:3:", 0) == 0);
    }
}

TEST_CASE("eig exit codes") {
    auto r = run({"eig", data("twobus.json"), "--model", "hifi3"});
    CHECK(r.code == exit_ok);
    CHECK(r.err.find("hifi3: stable") != std::string::npos);
    CHECK(r.out.rfind("re,im,kind", 0) == 0);
    r = run({"eig", "twobus", "--model", "full", "--kp", "3"});
    CHECK(r.code == exit_unstable);
    CHECK(r.err.find("unstable") != std::string::npos);
    r = run({"eig", "table1_cascade", "--model", "full", "--model", "simple3"});
    CHECK(r.code == exit_ok);
    r = run({"eig", "nonexistent.json"});
    CHECK(r.code == exit_error);
    r = run({"eig", "twobus", "--model", "bogus"});
    CHECK(r.code == exit_error);
    r = run({"frobnicate"});
    CHECK(r.code == exit_error);
}

TEST_CASE("critical and sweep") {
    auto r = run({"critical", "table1_cascade", "--model", "hifi3", "--bracket", "0.1:10"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("critical kp (hifi3): 0.78") != std::string::npos);

    const auto dir = scratch("sweep");
    fs::remove_all(dir);
    r = run({"sweep", "twobus", "--model", "hifi3", "--grid", "4x3", "--out", dir.string()});
    CHECK(r.code == exit_ok);
    const auto grid = slurp(dir / "sweep.csv");
    CHECK(grid.rfind("kp,kq,stable\n", 0) == 0);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 13);
    CHECK(fs::exists(dir / "boundary.csv"));
    r = run({"sweep", "twobus", "--grid", "4by3"});
    CHECK(r.code == exit_error);
}

TEST_CASE("simulate writes trajectories") {
    const auto dir = scratch("sim");
    fs::remove_all(dir);
    const auto r = run({"simulate", "twobus", "--model", "hifi3", "--t-end", "0.2", "--solver", "explicit",
                        "--noise", "1e-3", "--seed", "4", "--out", dir.string()});
    CHECK(r.code == exit_ok);
    const auto traj = slurp(dir / "trajectory.csv");
    CHECK(traj.rfind("t,theta[inv],omega[inv],u[inv]\n", 0) == 0);
    CHECK(slurp(dir / "outputs.csv").rfind("t,p_inv,q_inv,omega_inv,u_inv\n", 0) == 0);
}

TEST_CASE("reduce subcommand equals the Schur complement when gamma is zero") {
    const auto path = write_file("red.json", R"({"a_ss": [[-1, 0.5], [0.2, -2]], "a_sf": [[1], [0]],
        "a_fs": [[0.5, 1]], "a_ff": [[-4]], "gamma": [0]})");
    const auto r = run({"reduce", path, "--order", "1"});
    REQUIRE(r.code == exit_ok);
    std::istringstream in(r.out);
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    }
    REQUIRE(v.size() == 4);
    // A_ss - A_sf A_ff^-1 A_fs
    CHECK(v[0] == doctest::Approx(-1.0 + 0.125));
    CHECK(v[1] == doctest::Approx(0.5 + 0.25));
    CHECK(v[2] == doctest::Approx(0.2));
    CHECK(v[3] == doctest::Approx(-2.0));

    const auto bad = write_file("red_bad.json", R"({"a_ss": [[1]], "extra": 1})");
    CHECK(run({"reduce", bad}).code == exit_error);
}

TEST_CASE("plotdata emits columns") {
    const auto r = run({"plotdata", "--figure", "3", "--rows", "2"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.rfind("# full-model boundaries", 0) == 0);
    CHECK(run({"plotdata", "--figure", "9"}).code == exit_error);
}

TEST_CASE("bench prints a table") {
    const auto r = run({"bench", "--n", "2", "--t-end", "0.02", "--repeats", "1"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("| 2 | hifi3 | 6 | trbdf2 |") != std::string::npos);
}
