#include "mgmor/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgmor/analysis.hpp"
#include "mgmor/csv.hpp"
#include "mgmor/error.hpp"
#include "mgmor/reduction.hpp"
#include "mgmor/scenario.hpp"
#include "mgmor/sim.hpp"

namespace mgmor {

namespace {

namespace fs = std::filesystem;

struct Common {
    std::string scenario;
    std::vector<std::string> models{"full"};
    double kp_scale = 1.0;
    double kq_scale = 1.0;
    std::optional<double> kp;  // percent
    std::optional<double> kq;
    std::optional<double> line_length_km;
    double rating_scale = 1.0;
    double line_x_scale = 1.0;
    std::optional<double> zero_tol;
    std::string out_dir;
    unsigned seed = 0;
};

void add_scenario_options(CLI::App* cmd, Common& c, bool scenario_required = true) {
    auto* pos = cmd->add_option("scenario", c.scenario, "bundled fixture name (table1_cascade, twobus) or JSON file");
    if (scenario_required) pos->required();
    cmd->add_option("--kp-scale", c.kp_scale, "multiply every inverter's kp")->check(CLI::PositiveNumber);
    cmd->add_option("--kq-scale", c.kq_scale, "multiply every inverter's kq")->check(CLI::PositiveNumber);
    cmd->add_option("--kp", c.kp, "set the reference kp in percent (others scaled alike)")->check(CLI::PositiveNumber);
    cmd->add_option("--kq", c.kq, "set the reference kq in percent (others scaled alike)")->check(CLI::PositiveNumber);
    cmd->add_option("--line-length-km", c.line_length_km, "length of every line branch")->check(CLI::NonNegativeNumber);
    cmd->add_option("--rating-scale", c.rating_scale, "multiply inverter ratings at fixed kp, kq")->check(CLI::PositiveNumber);
    cmd->add_option("--xr-scale", c.line_x_scale, "multiply every line inductance")->check(CLI::PositiveNumber);
    cmd->add_option("--zero-tol", c.zero_tol, "reference-mode tolerance, 1/s")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "seed for randomized perturbations");
}

void add_model_option(CLI::App* cmd, Common& c, bool many) {
    auto* opt = cmd->add_option("--model", c.models, "full, simple3 or hifi3")
                    ->check(CLI::IsMember({"full", "simple3", "hifi3", "simple", "proposed"}));
    if (!many) opt->expected(1);
}

struct Loaded {
    Scenario scenario;
    Microgrid grid;
    FullModelOptions options;
    double zero_tol = default_zero_tol;
};

Loaded load(const Common& c) {
    Loaded l;
    ScenarioOverrides ov;
    ov.line_length_km = c.line_length_km;
    ov.rating_scale = c.rating_scale;
    ov.line_x_scale = c.line_x_scale;
    l.scenario = apply_overrides(load_scenario(c.scenario), ov);
    l.grid = to_microgrid(l.scenario);
    l.options = model_options(l.scenario);
    l.zero_tol = c.zero_tol ? *c.zero_tol : l.scenario.options.zero_tol;
    const auto& ref = l.grid.inverters.front().gains;
    const double kp_factor = c.kp ? (*c.kp / 100.0) / ref.kp : c.kp_scale;
    const double kq_factor = c.kq ? (*c.kq / 100.0) / ref.kq : c.kq_scale;
    if (kp_factor != 1.0 || kq_factor != 1.0) l.grid = with_gain_scale(l.grid, kp_factor, kq_factor);
    return l;
}

std::pair<double, double> parse_range(const std::string& s, const char* what) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw DomainError(std::string(what) + " must look like lo:hi");
    try {
        const double lo = std::stod(s.substr(0, colon));
        const double hi = std::stod(s.substr(colon + 1));
        if (!(lo > 0.0) || !(hi > lo)) throw DomainError(std::string(what) + " needs 0 < lo < hi");
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw DomainError(std::string(what) + " must look like lo:hi");
    }
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
    const auto x = s.find_first_of("xX");
    try {
        if (x == std::string::npos) throw std::invalid_argument("grid");
        const long n = std::stol(s.substr(0, x));
        const long m = std::stol(s.substr(x + 1));
        if (n < 1 || m < 1) throw std::invalid_argument("grid");
        return {static_cast<std::size_t>(n), static_cast<std::size_t>(m)};
    } catch (const std::logic_error&) {
        throw DomainError("--grid must look like NxM with positive N, M");
    }
}

// Writes to <out>/<file> when an output directory is set, else to `fallback`.
class Sink {
public:
    Sink(const std::string& dir, const std::string& file, std::ostream& fallback) {
        if (dir.empty()) {
            os_ = &fallback;
            return;
        }
        fs::create_directories(dir);
        path_ = (fs::path(dir) / file).string();
        file_.open(path_);
        if (!file_) throw Error("cannot write " + path_);
        os_ = &file_;
    }
    std::ostream& os() { return *os_; }
    const std::string& path() const { return path_; }

private:
    std::ofstream file_;
    std::ostream* os_ = nullptr;
    std::string path_;
};

std::string output_name(const std::string& stem, const std::string& model, bool several) {
    return several ? stem + "_" + model + ".csv" : stem + ".csv";
}

std::string pct(double v) {
    std::ostringstream os;
    os << format_number(100.0 * v) << "%";
    return os.str();
}

int cmd_eig(const Common& c, std::ostream& out, std::ostream& err) {
    const auto l = load(c);
    bool unstable = false;
    const bool several = c.models.size() > 1;
    for (const auto& name : c.models) {
        const auto kind = parse_model_kind(name);
        const auto rep = eigen_report(build_linear(l.grid, kind, l.options), l.zero_tol);
        Sink sink(c.out_dir, output_name("eig", std::string(to_string(kind)), several), out);
        write_eigenvalues(sink.os(), rep, to_string(kind));
        err << to_string(kind) << ": " << (rep.stable ? "stable" : "unstable") << " (abscissa "
            << format_number(rep.abscissa) << " 1/s, " << rep.eigenvalues.size() << " modes, "
            << rep.n_zero_modes << " reference)\n";
        unstable = unstable || !rep.stable;
    }
    return unstable ? exit_unstable : exit_ok;
}

StabilityBoundary as_percent(StabilityBoundary b) {
    for (auto& v : b.kp) v *= 100.0;
    for (auto& v : b.kq) v *= 100.0;
    for (auto& [kp, kq] : b.boundary) {
        kp *= 100.0;
        kq *= 100.0;
    }
    return b;
}

int cmd_sweep(const Common& c, const std::string& grid, const std::string& kp_range,
              const std::string& kq_range, std::ostream& out, std::ostream& err) {
    const auto l = load(c);
    const auto [nkp, nkq] = parse_grid(grid);
    const auto [kp_lo, kp_hi] = parse_range(kp_range, "--kp-range");
    const auto [kq_lo, kq_hi] = parse_range(kq_range, "--kq-range");
    const auto kp = linspace(kp_lo / 100.0, kp_hi / 100.0, nkp);
    const auto kq = linspace(kq_lo / 100.0, kq_hi / 100.0, nkq);
    const std::string dir = c.out_dir.empty() ? "." : c.out_dir;
    const bool several = c.models.size() > 1;
    RegionOptions ro;
    ro.zero_tol = l.zero_tol;
    for (const auto& name : c.models) {
        const auto kind = parse_model_kind(name);
        const auto region = as_percent(stability_region(gain_builder(l.grid, kind, l.options), kind, kp, kq, ro));
        const std::string m(to_string(kind));
        Sink g(dir, output_name("sweep", m, several), out);
        write_grid(g.os(), region);
        Sink b(dir, output_name("boundary", m, several), out);
        write_boundary(b.os(), region);
        std::size_t n_stable = 0;
        for (char s : region.stable) n_stable += s != 0;
        out << m << ": " << n_stable << "/" << region.stable.size() << " stable grid points, "
            << region.boundary.size() << " boundary points -> " << g.path() << ", " << b.path() << "\n";
    }
    (void)err;
    return exit_ok;
}

int cmd_critical(const Common& c, const std::string& axis_name, const std::string& bracket,
                 std::ostream& out) {
    const auto l = load(c);
    const auto axis = parse_gain_axis(axis_name);
    const auto [lo, hi] = parse_range(bracket, "--bracket");
    const auto& ref = l.grid.inverters.front().gains;
    const double other = axis == GainAxis::kp ? ref.kq : ref.kp;
    for (const auto& name : c.models) {
        const auto kind = parse_model_kind(name);
        const auto res = critical_gain(gain_builder(l.grid, kind, l.options), axis, other, lo / 100.0,
                                       hi / 100.0, {}, l.zero_tol);
        out << "critical " << to_string(axis) << " (" << to_string(kind) << "): " << pct(res.value)
            << "  bracket [" << pct(res.lo) << ", " << pct(res.hi) << "]  at "
            << (axis == GainAxis::kp ? "kq = " : "kp = ") << pct(other) << "\n";
    }
    return exit_ok;
}

struct SimArgs {
    double t_end = 1.0;
    std::string solver = "trbdf2";
    double kick = 1e-3;
    std::string kick_inverter;
    double noise = 0.0;
    bool linear = false;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
};

int cmd_simulate(const Common& c, const SimArgs& s, std::ostream& out, std::ostream& err) {
    const auto l = load(c);
    const bool several = c.models.size() > 1;
    for (const auto& name : c.models) {
        const auto kind = parse_model_kind(name);
        NonlinearModel model = s.linear ? as_nonlinear(build_linear(l.grid, kind, l.options))
                                        : build_nonlinear(l.grid, kind, l.options);
        const std::string target = s.kick_inverter.empty() ? l.grid.inverters.front().node : s.kick_inverter;
        Eigen::VectorXd x0 = angle_kick(model, target, s.kick);
        if (s.noise > 0.0) {
            std::mt19937_64 rng(c.seed);
            std::uniform_real_distribution<double> u(-s.noise, s.noise);
            for (const auto& tap : model.taps) x0(tap.theta) += u(rng);
        }
        IntegrateOptions io;
        io.solver = parse_solver(s.solver);
        io.rel_tol = s.rel_tol;
        io.abs_tol = s.abs_tol;
        const auto tr = integrate(model, x0, s.t_end, io);
        const std::string m(to_string(kind));
        Sink traj(c.out_dir, output_name("trajectory", m, several), out);
        write_trajectory(traj.os(), tr);
        if (!c.out_dir.empty()) {
            Sink outs(c.out_dir, output_name("outputs", m, several), out);
            write_outputs(outs.os(), tr);
        }
        err << m << ": " << tr.accepted << " steps (" << tr.rejected << " rejected)";
        if (tr.diverged) err << ", diverged at t = " << format_number(tr.t.back());
        err << "\n";
    }
    return exit_ok;
}

int cmd_bench(const Common& c, const std::vector<int>& sizes, const std::vector<std::string>& solvers,
              double t_end, int repeats, std::ostream& out) {
    std::vector<Microgrid> grids;
    if (!c.scenario.empty()) grids.push_back(load(c).grid);
    for (int n : sizes) grids.push_back(make_cascade(n));
    BenchOptions bo;
    bo.kinds.clear();
    for (const auto& m : c.models) bo.kinds.push_back(parse_model_kind(m));
    bo.solvers.clear();
    for (const auto& s : solvers) bo.solvers.push_back(parse_solver(s));
    bo.t_end = t_end;
    bo.repeats = repeats;
    const auto records = bench(grids, bo);

    out << "| n | model | n_s | solver | wall time (s) | steps | rejected |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : records) {
        out << "| " << r.n_inverters << " | " << to_string(r.kind) << " | " << r.n_states << " | "
            << to_string(r.solver) << " | " << (r.ok ? format_number(r.wall_time) : "NA") << " | "
            << r.accepted << " | " << r.rejected << " |\n";
    }
    for (const auto& r : records) {
        if (!r.ok) out << "note: n=" << r.n_inverters << " " << to_string(r.kind) << " " << to_string(r.solver)
                       << ": " << r.error << "\n";
    }
    if (!c.out_dir.empty()) {
        Sink s(c.out_dir, "bench.csv", out);
        CsvWriter w(s.os());
        w.header({"n", "n_states", "wall_time", "accepted", "rejected", "model", "solver", "ok"});
        for (const auto& r : records) {
            w.row({static_cast<double>(r.n_inverters), static_cast<double>(r.n_states), r.wall_time,
                   static_cast<double>(r.accepted), static_cast<double>(r.rejected)},
                  {std::string(to_string(r.kind)), std::string(to_string(r.solver)), r.ok ? "1" : "0"});
        }
    }
    return exit_ok;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ParseError("reduce file: missing key '" + key + "'");
    const auto& a = j.at(key);
    if (!a.is_array()) throw ParseError("reduce file: '" + key + "' must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(a.size());
    Eigen::Index cols = rows ? static_cast<Eigen::Index>(a[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& r = a[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) {
            throw ParseError("reduce file: '" + key + "' rows must have equal length");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            const auto& v = r[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw ParseError("reduce file: '" + key + "' entries must be numbers");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

int cmd_reduce(const std::string& path, int order, const std::string& out_dir, std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ParseError(path + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (k != "a_ss" && k != "a_sf" && k != "a_fs" && k != "a_ff" && k != "gamma") {
            throw ParseError(path + ": /" + k + ": unknown key");
        }
    }
    PartitionedLinear p;
    p.a_ss = json_matrix(j, "a_ss");
    p.a_sf = json_matrix(j, "a_sf");
    p.a_fs = json_matrix(j, "a_fs");
    p.a_ff = json_matrix(j, "a_ff");
    if (!j.contains("gamma") || !j.at("gamma").is_array()) throw ParseError(path + ": 'gamma' must be an array");
    const auto& g = j.at("gamma");
    p.gamma.resize(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g[i].is_number() || g[i].get<double>() < 0.0) {
            throw ParseError(path + ": 'gamma' entries must be non-negative numbers");
        }
        p.gamma(static_cast<Eigen::Index>(i)) = g[i].get<double>();
    }
    const auto a = order == 0 ? reduce_zero_order(p) : reduce_first_order(p);
    Sink s(out_dir, "reduced.csv", out);
    write_matrix(s.os(), a);
    return exit_ok;
}

// --- plot data (whitespace columns, blocks separated by blank lines) -------

double critical_or_nan(const GainModelBuilder& b, GainAxis axis, double other, double lo, double hi,
                       double zero_tol) {
    try {
        return critical_gain(b, axis, other, lo, hi, {}, zero_tol).value;
    } catch (const BracketError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

void boundary_table(std::ostream& os, const std::vector<std::string>& names,
                    const std::vector<GainModelBuilder>& builders, const std::vector<double>& kq,
                    double kp_lo, double kp_hi, double zero_tol) {
    os << "# kq_percent";
    for (const auto& n : names) os << " kp_crit_percent_" << n;
    os << "\n";
    for (double q : kq) {
        os << format_number(100.0 * q);
        for (const auto& b : builders) {
            os << " " << format_number(100.0 * critical_or_nan(b, GainAxis::kp, q, kp_lo, kp_hi, zero_tol));
        }
        os << "\n";
    }
}

int cmd_plotdata(const Common& c, int figure, std::size_t rows, std::ostream& out) {
    Common cc = c;
    if (cc.scenario.empty()) cc.scenario = (figure == 5 || figure == 6) ? "table1_cascade" : "twobus";
    Sink sink(c.out_dir, "fig" + std::to_string(figure) + ".dat", out);
    auto& os = sink.os();
    const std::vector<double> kq = linspace(0.005, 0.30, rows);
    const double kp_lo = 1e-4, kp_hi = 0.5;
    if (figure == 2) {
        const auto l = load(cc);
        std::vector<GainModelBuilder> bs;
        for (auto k : {ModelKind::full, ModelKind::simple3, ModelKind::hifi3}) bs.push_back(gain_builder(l.grid, k, l.options));
        os << "# stability boundaries of three models, stable to the left\n";
        boundary_table(os, {"full", "simple3", "hifi3"}, bs, kq, kp_lo, kp_hi, l.zero_tol);
    } else if (figure == 3 || figure == 4) {
        const std::vector<double> values = figure == 3 ? std::vector<double>{0.0, 1.0, 3.0, 6.0}
                                                       : std::vector<double>{0.5, 1.0, 2.0};
        std::vector<std::string> names;
        std::vector<GainModelBuilder> bs;
        double zt = default_zero_tol;
        for (double v : values) {
            Common cv = cc;
            if (figure == 3) {
                cv.line_length_km = v;
                names.push_back(format_number(v) + "km");
            } else {
                cv.rating_scale = c.rating_scale * v;
                names.push_back("rating" + format_number(v));
            }
            const auto l = load(cv);
            zt = l.zero_tol;
            bs.push_back(gain_builder(l.grid, parse_model_kind(c.models.front()), l.options));
        }
        os << "# full-model boundaries, stable to the left\n";
        boundary_table(os, names, bs, kq, kp_lo, kp_hi, zt);
    } else if (figure == 5) {
        const auto l = load(cc);
        const auto kp = linspace(0.003, 0.0075, rows);
        os << "# model kp_percent re im\n";
        int idx = 0;
        for (auto k : {ModelKind::full, ModelKind::simple3, ModelKind::hifi3}) {
            const auto b = gain_builder(l.grid, k, l.options);
            os << "# index " << idx++ << ": " << to_string(k) << "\n";
            for (double p : kp) {
                const auto rep = eigen_report(b(p, l.grid.inverters.front().gains.kq), l.zero_tol);
                for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
                    os << to_string(k) << " " << format_number(100.0 * p) << " "
                       << format_number(rep.eigenvalues(i).real()) << " "
                       << format_number(rep.eigenvalues(i).imag()) << "\n";
                }
            }
            os << "\n\n";
        }
    } else if (figure == 6) {
        if (!c.kp && c.kp_scale == 1.0) cc.kp = 0.75;
        const auto l = load(cc);
        int idx = 0;
        for (auto k : {ModelKind::full, ModelKind::simple3, ModelKind::hifi3}) {
            const auto m = build_nonlinear(l.grid, k, l.options);
            const auto tr = integrate(m, angle_kick(m, l.grid.inverters.front().node, 1e-3), 1.0);
            os << "# index " << idx++ << ": " << to_string(k) << " t p q omega u of "
               << l.grid.inverters.front().node << "\n";
            for (std::size_t r = 0; r < tr.t.size(); ++r) {
                const auto i = static_cast<Eigen::Index>(r);
                os << format_number(tr.t[r]) << " " << format_number(tr.p(i, 0)) << " "
                   << format_number(tr.q(i, 0)) << " " << format_number(tr.omega(i, 0)) << " "
                   << format_number(tr.u(i, 0)) << "\n";
            }
            os << "\n\n";
        }
    } else {
        throw DomainError("--figure must be one of 2, 3, 4, 5, 6");
    }
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Droop-inverter microgrid models, reduction and stability analysis", "mgmor"};
    app.require_subcommand(1);

    Common eig_c, sweep_c, crit_c, sim_c, bench_c, plot_c;
    auto* eig = app.add_subcommand("eig", "eigenvalues and stability verdict (exit 0 stable, 2 unstable)");
    add_scenario_options(eig, eig_c);
    add_model_option(eig, eig_c, true);

    auto* sweep = app.add_subcommand("sweep", "(kp, kq) stability grid and boundary");
    add_scenario_options(sweep, sweep_c);
    add_model_option(sweep, sweep_c, true);
    std::string grid = "40x40", kp_range = "0.05:3", kq_range = "0.5:30";
    sweep->add_option("--grid", grid, "NxM grid (kp points x kq points)");
    sweep->add_option("--kp-range", kp_range, "kp range in percent, lo:hi");
    sweep->add_option("--kq-range", kq_range, "kq range in percent, lo:hi");

    auto* crit = app.add_subcommand("critical", "critical droop gain by bisection");
    add_scenario_options(crit, crit_c);
    add_model_option(crit, crit_c, true);
    std::string axis = "kp", bracket = "0.01:100";
    crit->add_option("--axis", axis, "kp or kq")->check(CLI::IsMember({"kp", "kq"}));
    crit->add_option("--bracket", bracket, "search range in percent, lo:hi");

    auto* sim = app.add_subcommand("simulate", "nonlinear time-domain simulation");
    add_scenario_options(sim, sim_c);
    add_model_option(sim, sim_c, true);
    SimArgs sa;
    sim->add_option("--t-end", sa.t_end, "end time, s")->check(CLI::PositiveNumber);
    sim->add_option("--solver", sa.solver, "trbdf2 (implicit) or dopri45 (explicit)")
        ->check(CLI::IsMember({"trbdf2", "dopri45", "implicit", "explicit"}));
    sim->add_option("--kick", sa.kick, "initial angle displacement, rad");
    sim->add_option("--kick-inverter", sa.kick_inverter, "inverter receiving the kick (default: first)");
    sim->add_option("--noise", sa.noise, "uniform random angle noise amplitude, rad (uses --seed)")
        ->check(CLI::NonNegativeNumber);
    sim->add_flag("--linear", sa.linear, "integrate the linearized model");
    sim->add_option("--rel-tol", sa.rel_tol)->check(CLI::PositiveNumber);
    sim->add_option("--abs-tol", sa.abs_tol)->check(CLI::PositiveNumber);

    auto* bn = app.add_subcommand("bench", "runtime and state counts of full vs reduced models");
    add_scenario_options(bn, bench_c, false);
    bench_c.models = {"full", "hifi3"};
    add_model_option(bn, bench_c, true);
    std::vector<int> sizes{5, 25};
    std::vector<std::string> solvers{"trbdf2"};
    double bench_t_end = 1.0;
    int repeats = 5;
    bn->add_option("--n", sizes, "cascade sizes")->check(CLI::PositiveNumber);
    bn->add_option("--solver", solvers, "solvers")->check(CLI::IsMember({"trbdf2", "dopri45", "implicit", "explicit"}));
    bn->add_option("--t-end", bench_t_end)->check(CLI::PositiveNumber);
    bn->add_option("--repeats", repeats, "timed runs (median reported)")->check(CLI::PositiveNumber);

    auto* red = app.add_subcommand("reduce", "reduce a partitioned linear system from a JSON file");
    std::string red_path, red_out;
    int order = 1;
    red->add_option("file", red_path, "JSON with a_ss, a_sf, a_fs, a_ff, gamma")->required();
    red->add_option("--order", order, "0 or 1")->check(CLI::IsMember({0, 1}));
    red->add_option("--out", red_out, "output directory");

    auto* plot = app.add_subcommand("plotdata", "gnuplot columns reproducing the stability figures");
    add_scenario_options(plot, plot_c, false);
    add_model_option(plot, plot_c, false);
    int figure = 2;
    std::size_t rows = 25;
    plot->add_option("--figure", figure, "2, 3, 4, 5 or 6")->required();
    plot->add_option("--rows", rows, "kq rows (figs 2-4) or kp steps (fig 5)")->check(CLI::PositiveNumber);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }

    try {
        if (eig->parsed()) return cmd_eig(eig_c, out, err);
        if (sweep->parsed()) return cmd_sweep(sweep_c, grid, kp_range, kq_range, out, err);
        if (crit->parsed()) return cmd_critical(crit_c, axis, bracket, out);
        if (sim->parsed()) return cmd_simulate(sim_c, sa, out, err);
        if (bn->parsed()) return cmd_bench(bench_c, sizes, solvers, bench_t_end, repeats, out);
        if (red->parsed()) return cmd_reduce(red_path, order, red_out, out);
        if (plot->parsed()) return cmd_plotdata(plot_c, figure, rows, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}

}  // namespace mgmor
