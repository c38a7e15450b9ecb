#include "mgmor/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mgmor/error.hpp"

namespace mgmor {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
                throw ParseError(path_ + "/" + k + ": unknown key");
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number()) throw ParseError(path_ + "/" + key + ": expected a number");
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::string string(const char* key) const {
        const auto& v = at(key);
        if (!v.is_string()) throw ParseError(path_ + "/" + key + ": expected a string");
        auto s = v.get<std::string>();
        if (s.empty()) throw ParseError(path_ + "/" + key + ": empty identifier");
        return s;
    }
    std::string string(const char* key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = at(key);
        if (!v.is_boolean()) throw ParseError(path_ + "/" + key + ": expected true or false");
        return v.get<bool>();
    }

    const json& array(const char* key) const {
        const auto& v = at(key);
        if (!v.is_array()) throw ParseError(path_ + "/" + key + ": expected an array");
        return v;
    }

    const json& at(const char* key) const {
        if (!j_.contains(key)) throw ParseError(path_ + ": missing key '" + key + "'");
        return j_.at(key);
    }

    std::string child(const char* key) const { return path_ + "/" + key; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError((path_.empty() ? std::string("/") : path_) + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
};

// Union-find over bus names; stiff buses win as representatives.
class BusSets {
public:
    void add(const std::string& b) {
        if (!parent_.count(b)) {
            parent_[b] = b;
            order_.push_back(b);
        }
    }
    std::string find(const std::string& b) {
        add(b);
        std::string r = b;
        while (parent_[r] != r) r = parent_[r];
        parent_[b] = r;
        return r;
    }
    void unite(const std::string& a, const std::string& b, const std::set<std::string>& stiff) {
        auto ra = find(a);
        auto rb = find(b);
        if (ra == rb) return;
        if (stiff.count(ra) && stiff.count(rb)) {
            throw TopologyError("zero-length branch joins two stiff buses '" + ra + "' and '" + rb + "'");
        }
        if (stiff.count(rb)) std::swap(ra, rb);
        parent_[rb] = ra;
    }
    const std::vector<std::string>& order() const { return order_; }

private:
    std::map<std::string, std::string> parent_;
    std::vector<std::string> order_;
};

bool is_short(const ScenarioBranch& b) {
    return b.length_km == 0.0 || (b.r_ohm_per_km == 0.0 && b.l_mh_per_km == 0.0);
}

void merge_series(NetworkSpec& net) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = net.buses.begin(); it != net.buses.end(); ++it) {
            const auto& bus = *it;
            const bool loaded = std::any_of(net.loads.begin(), net.loads.end(),
                                            [&](const Load& l) { return l.bus == bus; });
            if (loaded) continue;
            std::vector<std::size_t> inc;
            for (std::size_t k = 0; k < net.branches.size(); ++k) {
                if (net.branches[k].from == bus || net.branches[k].to == bus) inc.push_back(k);
            }
            if (inc.size() != 2) continue;
            const auto& b1 = net.branches[inc[0]];
            const auto& b2 = net.branches[inc[1]];
            const std::string u = b1.from == bus ? b1.to : b1.from;
            const std::string w = b2.from == bus ? b2.to : b2.from;
            if (u == w || u == bus || w == bus) continue;
            Branch merged{u, w, b1.r + b2.r, b1.x + b2.x};
            net.branches[inc[0]] = merged;
            net.branches.erase(net.branches.begin() + static_cast<std::ptrdiff_t>(inc[1]));
            net.buses.erase(it);
            changed = true;
            break;
        }
    }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line/column pair.
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream os;
        os << source << ":" << line << ":" << col << ": malformed JSON (" << e.what() << ")";
        throw ParseError(os.str());
    }
    try {
        Scenario sc;
        Reader root(doc, "");
        root.allow({"name", "base", "inverters", "branches", "loads", "stiff_buses", "options"});
        sc.name = root.string("name", "");
        {
            Reader b(root.at("base"), root.child("base"));
            b.allow({"u_base", "s_base", "f0"});
            sc.base = {b.number("u_base"), b.number("s_base"), b.number("f0")};
        }
        const auto& invs = root.array("inverters");
        for (std::size_t i = 0; i < invs.size(); ++i) {
            Reader r(invs[i], root.child("inverters") + "/" + std::to_string(i));
            r.allow({"name", "bus", "sn_kva", "mp", "nq", "wc", "rc_ohm", "lc_mh"});
            ScenarioInverter inv;
            inv.bus = r.string("bus");
            inv.name = r.string("name", "inv_" + inv.bus);
            inv.sn_kva = r.number("sn_kva");
            inv.mp = r.number("mp");
            inv.nq = r.number("nq");
            inv.wc = r.number("wc");
            inv.rc_ohm = r.number("rc_ohm");
            inv.lc_mh = r.number("lc_mh");
            sc.inverters.push_back(inv);
        }
        if (root.has("branches")) {
            const auto& brs = root.array("branches");
            for (std::size_t i = 0; i < brs.size(); ++i) {
                Reader r(brs[i], root.child("branches") + "/" + std::to_string(i));
                r.allow({"from", "to", "r_ohm_per_km", "l_mh_per_km", "length_km"});
                sc.branches.push_back({r.string("from"), r.string("to"), r.number("r_ohm_per_km"),
                                       r.number("l_mh_per_km"), r.number("length_km")});
            }
        }
        if (root.has("loads")) {
            const auto& lds = root.array("loads");
            for (std::size_t i = 0; i < lds.size(); ++i) {
                Reader r(lds[i], root.child("loads") + "/" + std::to_string(i));
                r.allow({"bus", "z_real_ohm", "z_imag_ohm"});
                sc.loads.push_back({r.string("bus"), r.number("z_real_ohm"), r.number("z_imag_ohm", 0.0)});
            }
        }
        if (root.has("stiff_buses")) {
            const auto& st = root.array("stiff_buses");
            for (std::size_t i = 0; i < st.size(); ++i) {
                Reader r(st[i], root.child("stiff_buses") + "/" + std::to_string(i));
                r.allow({"bus", "u_pu"});
                sc.stiff_buses.push_back({r.string("bus"), r.number("u_pu", 1.0)});
            }
        }
        if (root.has("options")) {
            Reader r(root.at("options"), root.child("options"));
            r.allow({"virtual_resistance_pu", "zero_tol", "merge_series"});
            sc.options.virtual_resistance_pu = r.number("virtual_resistance_pu", sc.options.virtual_resistance_pu);
            sc.options.zero_tol = r.number("zero_tol", sc.options.zero_tol);
            sc.options.merge_series = r.boolean("merge_series", sc.options.merge_series);
        }
        return sc;
    } catch (const ParseError& e) {
        throw ParseError(source + ": " + e.what());
    }
}

Scenario load_scenario(const std::string& name_or_path) {
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
        return parse_scenario(fixture_text(name_or_path), name_or_path);
    }
    std::ifstream in(name_or_path);
    if (!in) throw ParseError(name_or_path + ": cannot open scenario (not a file or bundled fixture)");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), name_or_path);
}

std::string emit_scenario(const Scenario& sc) {
    ojson doc;
    if (!sc.name.empty()) doc["name"] = sc.name;
    doc["base"] = {{"u_base", sc.base.u_base}, {"s_base", sc.base.s_base}, {"f0", sc.base.f0}};
    doc["inverters"] = ojson::array();
    for (const auto& i : sc.inverters) {
        doc["inverters"].push_back({{"name", i.name}, {"bus", i.bus}, {"sn_kva", i.sn_kva}, {"mp", i.mp},
                                    {"nq", i.nq}, {"wc", i.wc}, {"rc_ohm", i.rc_ohm}, {"lc_mh", i.lc_mh}});
    }
    doc["branches"] = ojson::array();
    for (const auto& b : sc.branches) {
        doc["branches"].push_back({{"from", b.from}, {"to", b.to}, {"r_ohm_per_km", b.r_ohm_per_km},
                                   {"l_mh_per_km", b.l_mh_per_km}, {"length_km", b.length_km}});
    }
    doc["loads"] = ojson::array();
    for (const auto& l : sc.loads) {
        doc["loads"].push_back({{"bus", l.bus}, {"z_real_ohm", l.z_real_ohm}, {"z_imag_ohm", l.z_imag_ohm}});
    }
    if (!sc.stiff_buses.empty()) {
        doc["stiff_buses"] = ojson::array();
        for (const auto& s : sc.stiff_buses) doc["stiff_buses"].push_back({{"bus", s.bus}, {"u_pu", s.u_pu}});
    }
    doc["options"] = {{"virtual_resistance_pu", sc.options.virtual_resistance_pu},
                      {"zero_tol", sc.options.zero_tol},
                      {"merge_series", sc.options.merge_series}};
    return doc.dump(2) + "\n";
}

Scenario apply_overrides(Scenario sc, const ScenarioOverrides& ov) {
    if (!(ov.rating_scale > 0.0)) throw DomainError("rating scale must be positive");
    if (!(ov.line_x_scale > 0.0)) throw DomainError("line reactance scale must be positive");
    if (ov.line_length_km && !(*ov.line_length_km >= 0.0)) throw DomainError("line length must be >= 0");
    for (auto& inv : sc.inverters) {
        inv.sn_kva *= ov.rating_scale;
        inv.mp /= ov.rating_scale;
        inv.nq /= ov.rating_scale;
    }
    for (auto& b : sc.branches) {
        if (ov.line_length_km) b.length_km = *ov.line_length_km;
        b.l_mh_per_km *= ov.line_x_scale;
    }
    return sc;
}

Microgrid to_microgrid(const Scenario& sc) {
    Microgrid mg;
    auto& net = mg.network;
    net.base = make_base(sc.base.u_base, sc.base.s_base, sc.base.f0);
    const auto& base = net.base;
    if (sc.inverters.empty()) throw TopologyError("scenario has no inverters");

    std::set<std::string> stiff;
    for (const auto& s : sc.stiff_buses) {
        if (!stiff.insert(s.bus).second) throw TopologyError("duplicate stiff bus '" + s.bus + "'");
    }
    BusSets sets;
    for (const auto& inv : sc.inverters) sets.add(inv.bus);
    for (const auto& b : sc.branches) {
        if (b.length_km < 0.0) throw DomainError("branch " + b.from + "-" + b.to + ": negative length");
        sets.add(b.from);
        sets.add(b.to);
    }
    for (const auto& l : sc.loads) sets.add(l.bus);
    for (const auto& s : sc.stiff_buses) sets.add(s.bus);
    for (const auto& b : sc.branches) {
        if (is_short(b)) sets.unite(b.from, b.to, stiff);
    }

    std::set<std::string> names;
    for (const auto& inv : sc.inverters) {
        if (!names.insert(inv.name).second) throw TopologyError("duplicate inverter name '" + inv.name + "'");
        net.inverter_nodes.push_back(inv.name);
    }
    for (const auto& s : sc.stiff_buses) {
        if (sets.find(s.bus) == s.bus) net.stiff_buses.push_back({s.bus, s.u_pu});
    }
    for (const auto& b : sets.order()) {
        if (names.count(b)) throw TopologyError("bus '" + b + "' clashes with an inverter name");
        if (sets.find(b) == b && !stiff.count(b)) net.buses.push_back(b);
    }

    for (const auto& inv : sc.inverters) {
        const auto z = impedance_to_pu(inv.rc_ohm, inv.lc_mh * 1e-3, base);
        net.branches.push_back({inv.name, sets.find(inv.bus), z.r, z.x});
    }
    for (const auto& b : sc.branches) {
        if (is_short(b)) continue;
        const auto from = sets.find(b.from);
        const auto to = sets.find(b.to);
        if (from == to) continue;
        const auto z = impedance_to_pu(b.r_ohm_per_km * b.length_km, b.l_mh_per_km * 1e-3 * b.length_km, base);
        net.branches.push_back({from, to, z.r, z.x});
    }
    for (const auto& l : sc.loads) {
        net.loads.push_back({sets.find(l.bus), base.impedance_to_pu(l.z_real_ohm), base.impedance_to_pu(l.z_imag_ohm)});
    }
    if (sc.options.merge_series) merge_series(net);

    for (const auto& inv : sc.inverters) {
        DroopInverter d;
        d.node = inv.name;
        if (!(inv.wc > 0.0)) throw DomainError("inverter '" + inv.name + "': wc must be positive");
        if (!(inv.mp > 0.0) || !(inv.nq > 0.0) || !(inv.sn_kva > 0.0)) {
            throw DomainError("inverter '" + inv.name + "': mp, nq and sn_kva must be positive");
        }
        d.gains = normalize_droops(inv.mp, inv.nq, inv.sn_kva * 1e3, base);
        d.tau = 1.0 / inv.wc;
        d.w_set = base.w0;
        d.u_set = 1.0;
        int incident = 0;
        for (const auto& b : net.branches) {
            if (b.from == inv.name || b.to == inv.name) {
                d.coupling = b;
                ++incident;
            }
        }
        if (incident != 1) throw TopologyError("inverter '" + inv.name + "' must have exactly one coupling branch");
        mg.inverters.push_back(d);
    }
    mg.validate();
    return mg;
}

Scenario from_microgrid(const Microgrid& mg, const std::string& name) {
    mg.validate();
    const auto& net = mg.network;
    const auto& base = net.base;
    Scenario sc;
    sc.name = name;
    sc.base = {base.u_base, base.s_base, base.w0 / (2.0 * std::numbers::pi)};
    std::set<std::string> inverter_nodes(net.inverter_nodes.begin(), net.inverter_nodes.end());
    for (const auto& inv : mg.inverters) {
        const Branch* coupling = nullptr;
        for (const auto& b : net.branches) {
            if (b.from == inv.node || b.to == inv.node) coupling = &b;
        }
        if (!coupling) throw TopologyError("inverter '" + inv.node + "' has no coupling branch");
        ScenarioInverter si;
        si.name = inv.node;
        si.bus = coupling->from == inv.node ? coupling->to : coupling->from;
        if (inverter_nodes.count(si.bus)) {
            throw TopologyError("inverter '" + inv.node + "' couples directly to another inverter");
        }
        si.sn_kva = inv.gains.sn * base.s_base / 1e3;
        si.mp = inv.gains.mp / base.s_base;
        si.nq = inv.gains.nq * base.u_base / base.s_base;
        si.wc = 1.0 / inv.tau;
        si.rc_ohm = base.impedance_from_pu(coupling->r);
        si.lc_mh = base.impedance_from_pu(coupling->x) / base.w0 * 1e3;
        sc.inverters.push_back(si);
    }
    for (const auto& b : net.branches) {
        if (inverter_nodes.count(b.from) || inverter_nodes.count(b.to)) continue;
        sc.branches.push_back({b.from, b.to, base.impedance_from_pu(b.r),
                               base.impedance_from_pu(b.x) / base.w0 * 1e3, 1.0});
    }
    for (const auto& l : net.loads) {
        sc.loads.push_back({l.bus, base.impedance_from_pu(l.r), base.impedance_from_pu(l.x)});
    }
    for (const auto& s : net.stiff_buses) sc.stiff_buses.push_back({s.bus, s.u});
    return sc;
}

FullModelOptions model_options(const Scenario& sc) {
    FullModelOptions o;
    o.virtual_resistance = sc.options.virtual_resistance_pu;
    return o;
}

}  // namespace mgmor
