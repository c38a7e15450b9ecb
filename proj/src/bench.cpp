#include <algorithm>
#include <chrono>
#include <string>

#include "mgmor/error.hpp"
#include "mgmor/sim.hpp"

namespace mgmor {

CascadeParams table1_params() {
    CascadeParams p;
    p.base = make_base(381.58, 1e4, 50.0);
    return p;
}

Microgrid make_cascade(int n, const CascadeParams& p) {
    if (n < 1) throw DomainError("cascade needs at least one inverter");
    if (p.line_km.empty() || p.loads_ohm.empty()) throw DomainError("cascade needs line lengths and loads");
    if (!(p.line_x_scale > 0.0)) throw DomainError("line reactance scale must be positive");
    Microgrid mg;
    auto& net = mg.network;
    net.base = p.base;
    const auto coupling = impedance_to_pu(p.rc_ohm, p.lc_h, p.base);
    const auto gains = normalize_droops(p.mp, p.nq, p.sn_va, p.base);
    for (int k = 1; k <= n; ++k) {
        const std::string inv = "inv" + std::to_string(k);
        const std::string bus = "bus" + std::to_string(k);
        net.inverter_nodes.push_back(inv);
        net.buses.push_back(bus);
        net.branches.push_back({inv, bus, coupling.r, coupling.x});

        DroopInverter d;
        d.node = inv;
        d.gains = gains;
        d.tau = 1.0 / p.wc;
        d.w_set = p.base.w0;
        d.u_set = 1.0;
        d.coupling = net.branches.back();
        mg.inverters.push_back(d);
    }
    for (int k = 1; k < n; ++k) {
        const double km = p.line_km[static_cast<std::size_t>(k - 1) % p.line_km.size()];
        const auto z = impedance_to_pu(p.line_r_ohm_per_km * km, p.line_l_h_per_km * km, p.base);
        net.branches.push_back({"bus" + std::to_string(k), "bus" + std::to_string(k + 1), z.r,
                                z.x * p.line_x_scale});
    }
    for (int k = 1; k <= n; ++k) {
        const auto zl = p.loads_ohm[static_cast<std::size_t>(k - 1) % p.loads_ohm.size()];
        net.loads.push_back({"bus" + std::to_string(k), p.base.impedance_to_pu(zl.real()),
                             p.base.impedance_to_pu(zl.imag())});
    }
    mg.validate();
    return mg;
}

std::vector<BenchRecord> bench(const std::vector<Microgrid>& grids, const BenchOptions& opt) {
    if (opt.repeats < 1) throw DomainError("bench needs at least one timed repeat");
    std::vector<BenchRecord> out;
    for (const auto& mg : grids) {
        for (const auto kind : opt.kinds) {
            for (const auto solver : opt.solvers) {
                BenchRecord rec;
                rec.kind = kind;
                rec.solver = solver;
                rec.n_inverters = static_cast<int>(mg.inverters.size());
                try {
                    const auto model = build_nonlinear(mg, kind);
                    rec.n_states = model.dimension;
                    const auto x0 = angle_kick(model, mg.inverters.front().node, opt.angle_kick);
                    IntegrateOptions io = opt.integrate;
                    io.solver = solver;
                    io.store_states = false;
                    io.compute_outputs = false;
                    std::vector<double> times;
                    for (int k = 0; k < opt.warmup + opt.repeats; ++k) {
                        const auto t0 = std::chrono::steady_clock::now();
                        const auto tr = integrate(model, x0, opt.t_end, io);
                        const auto t1 = std::chrono::steady_clock::now();
                        if (k < opt.warmup) continue;
                        times.push_back(std::chrono::duration<double>(t1 - t0).count());
                        rec.accepted = tr.accepted;
                        rec.rejected = tr.rejected;
                    }
                    std::sort(times.begin(), times.end());
                    rec.wall_time = times[times.size() / 2];
                } catch (const std::exception& e) {
                    rec.ok = false;
                    rec.error = e.what();
                }
                out.push_back(rec);
            }
        }
    }
    return out;
}

}  // namespace mgmor
