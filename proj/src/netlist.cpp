#include "tlsim/netlist.hpp"

#include "tlsim/errors.hpp"
#include "tlsim/textio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tlsim {

namespace {

void check_node(int node, int num_nodes, const char* what) {
    if (node < 1 || node > num_nodes)
        throw std::invalid_argument(std::string(what) + ": node " + std::to_string(node) +
                                    " out of range 1.." + std::to_string(num_nodes));
}

void check_positive(double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

} // namespace

Netlist::Netlist(int num_nodes, std::string label) : num_nodes_(num_nodes), label_(std::move(label)) {
    if (num_nodes < 1) throw std::invalid_argument("netlist must have at least one node");
}

void Netlist::add(const Component& c) {
    if (const auto* cap = std::get_if<GroundCap>(&c)) {
        check_node(cap->node, num_nodes_, "capg");
        check_positive(cap->capacitance, "capacitance");
    } else if (const auto* ind = std::get_if<GroundInd>(&c)) {
        check_node(ind->node, num_nodes_, "indg");
        check_positive(ind->inductance, "inductance");
        for (const auto& existing : components_)
            if (const auto* e = std::get_if<GroundInd>(&existing); e && e->node == ind->node)
                throw std::invalid_argument("duplicate grounded inductor at node " +
                                            std::to_string(ind->node));
    } else {
        const auto& vf = std::get<DirectedCoupling>(c);
        check_node(vf.input, num_nodes_, "vfcap");
        check_node(vf.driven, num_nodes_, "vfcap");
        check_positive(vf.capacitance, "capacitance");
        if (vf.input == vf.driven)
            throw std::invalid_argument("self-coupling at node " + std::to_string(vf.input));
    }
    components_.push_back(c);
}

Netlist Netlist::canonical() const {
    std::map<int, double> caps;
    std::map<int, double> inds;
    std::map<std::pair<int, int>, double> couplings;
    for (const auto& c : components_) {
        if (const auto* cap = std::get_if<GroundCap>(&c)) {
            caps[cap->node] += cap->capacitance;
        } else if (const auto* ind = std::get_if<GroundInd>(&c)) {
            inds[ind->node] = ind->inductance;
        } else {
            const auto& vf = std::get<DirectedCoupling>(c);
            couplings[{vf.input, vf.driven}] += vf.capacitance;
        }
    }
    Netlist out(num_nodes_, label_);
    for (const auto& [node, c] : caps) out.add(GroundCap{node, c});
    for (const auto& [node, l] : inds) out.add(GroundInd{node, l});
    for (const auto& [key, c] : couplings) out.add(DirectedCoupling{key.first, key.second, c});
    return out;
}

bool operator==(const Netlist& a, const Netlist& b) {
    if (a.num_nodes_ != b.num_nodes_) return false;
    const Netlist ca = a.canonical();
    const Netlist cb = b.canonical();
    if (ca.components_.size() != cb.components_.size()) return false;
    for (std::size_t i = 0; i < ca.components_.size(); ++i) {
        const auto& x = ca.components_[i];
        const auto& y = cb.components_[i];
        if (x.index() != y.index()) return false;
        if (const auto* cx = std::get_if<GroundCap>(&x)) {
            const auto& cy = std::get<GroundCap>(y);
            if (cx->node != cy.node || cx->capacitance != cy.capacitance) return false;
        } else if (const auto* ix = std::get_if<GroundInd>(&x)) {
            const auto& iy = std::get<GroundInd>(y);
            if (ix->node != iy.node || ix->inductance != iy.inductance) return false;
        } else {
            const auto& vx = std::get<DirectedCoupling>(x);
            const auto& vy = std::get<DirectedCoupling>(y);
            if (vx.input != vy.input || vx.driven != vy.driven || vx.capacitance != vy.capacitance)
                return false;
        }
    }
    return true;
}

void validate_chain_params(const ChainParams& p) {
    if (p.sites < 1) throw std::invalid_argument("chain must have at least one site");
    check_positive(p.c0, "C0");
    check_positive(p.c1, "C1");
    check_positive(p.inductance, "L");
    if (!(p.c2 >= 0) || !std::isfinite(p.c2)) throw std::invalid_argument("C2 must be >= 0");
    if (!(p.c3 >= 0) || !std::isfinite(p.c3)) throw std::invalid_argument("C3 must be >= 0");
    if (p.c2 > 0 && p.sites < 2)
        throw std::invalid_argument("boundary coupling needs at least two sites");
}

Netlist build_chain(const ChainParams& p) {
    validate_chain_params(p);
    const int n = p.sites;
    Netlist out(n, "chain N=" + std::to_string(n));
    for (int m = 1; m <= n; ++m) out.add(GroundInd{m, p.inductance});
    for (int m = 1; m < n; ++m) out.add(GroundCap{m, p.c0});
    if (p.c3 > 0) out.add(GroundCap{n, p.c3});
    for (int m = 1; m < n; ++m) out.add(DirectedCoupling{m + 1, m, p.c1});
    if (p.c2 > 0) out.add(DirectedCoupling{1, n, p.c2});
    return out;
}

std::optional<ChainMeta> chain_meta(const Netlist& netlist) {
    const int n = netlist.num_nodes();
    if (n < 2) return std::nullopt;

    std::vector<double> cap_sum(n + 1, 0.0);
    std::vector<int> ind_count(n + 1, 0);
    std::vector<double> ind_val(n + 1, 0.0);
    std::map<std::pair<int, int>, double> couplings;
    for (const auto& c : netlist.components()) {
        if (const auto* cap = std::get_if<GroundCap>(&c)) {
            cap_sum[cap->node] += cap->capacitance;
        } else if (const auto* ind = std::get_if<GroundInd>(&c)) {
            ind_count[ind->node] += 1;
            ind_val[ind->node] = ind->inductance;
        } else {
            const auto& vf = std::get<DirectedCoupling>(c);
            couplings[{vf.input, vf.driven}] += vf.capacitance;
        }
    }

    ChainParams p;
    p.sites = n;

    // One inductor per node, all equal.
    p.inductance = ind_val[1];
    for (int m = 1; m <= n; ++m)
        if (ind_count[m] != 1 || ind_val[m] != p.inductance) return std::nullopt;

    // The same C0 ground capacitance on each bulk node.
    p.c0 = cap_sum[1];
    if (p.c0 <= 0) return std::nullopt;
    for (int m = 1; m < n; ++m)
        if (cap_sum[m] != p.c0) return std::nullopt;

    // Node N carries C3 alone (possibly absent, meaning C3 = 0).
    p.c3 = cap_sum[n];

    // Bulk couplings m+1 -> m, all equal; optional corner 1 -> N.
    const auto bulk = couplings.find({2, 1});
    if (bulk == couplings.end()) return std::nullopt;
    p.c1 = bulk->second;
    std::size_t expected = 0;
    for (int m = 1; m < n; ++m) {
        const auto it = couplings.find({m + 1, m});
        if (it == couplings.end() || it->second != p.c1) return std::nullopt;
        ++expected;
    }
    const auto corner = couplings.find({1, n});
    if (corner != couplings.end()) {
        p.c2 = corner->second;
        ++expected;
    }
    if (couplings.size() != expected) return std::nullopt;

    ChainMeta meta;
    meta.params = p;
    meta.delta_t = p.c2 == 0.0 ? 0.0 : p.c2 / p.c1;
    return meta;
}

Netlist parse_netlist(const std::string& text) {
    std::optional<Netlist> netlist;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    auto fail = [&](const std::string& msg) -> void { throw ParseError(lineno, msg); };

    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

        std::istringstream tokens(line);
        std::vector<std::string> tok;
        for (std::string t; tokens >> t;) tok.push_back(t);
        if (tok.empty()) continue;

        const std::string& directive = tok[0];
        if (directive == "nodes") {
            if (netlist) fail("duplicate 'nodes' directive");
            if (tok.size() != 2) fail("'nodes' expects one argument");
            const auto n = parse_int(tok[1]);
            if (!n || *n < 1) fail("node count must be a positive integer");
            netlist.emplace(int(*n));
            continue;
        }
        if (!netlist) fail("component before 'nodes' directive");

        auto node_arg = [&](const std::string& t) -> int {
            const auto v = parse_int(t);
            if (!v || *v < 1 || *v > netlist->num_nodes())
                fail("node " + t + " out of range 1.." + std::to_string(netlist->num_nodes()));
            return int(*v);
        };
        auto value_arg = [&](const std::string& t, const char* what) -> double {
            const auto v = parse_double(t);
            if (!v) fail(std::string("malformed number '") + t + "'");
            if (!(*v > 0) || !std::isfinite(*v)) fail(std::string(what) + " must be positive");
            return *v;
        };

        try {
            if (directive == "capg") {
                if (tok.size() != 3) fail("'capg' expects <node> <farads>");
                netlist->add(GroundCap{node_arg(tok[1]), value_arg(tok[2], "capacitance")});
            } else if (directive == "indg") {
                if (tok.size() != 3) fail("'indg' expects <node> <henrys>");
                netlist->add(GroundInd{node_arg(tok[1]), value_arg(tok[2], "inductance")});
            } else if (directive == "vfcap") {
                if (tok.size() != 4) fail("'vfcap' expects <input> <driven> <farads>");
                netlist->add(DirectedCoupling{node_arg(tok[1]), node_arg(tok[2]),
                                              value_arg(tok[3], "capacitance")});
            } else {
                fail("unknown directive '" + directive + "'");
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (!netlist) throw ParseError(lineno, "missing 'nodes' directive");
    return std::move(*netlist);
}

std::string serialize_netlist(const Netlist& n) {
    const Netlist c = n.canonical();
    std::string out;
    if (!c.label().empty()) out += "# " + c.label() + "\n";
    out += "nodes " + std::to_string(c.num_nodes()) + "\n";
    for (const auto& comp : c.components()) {
        if (const auto* cap = std::get_if<GroundCap>(&comp)) {
            out += "capg " + std::to_string(cap->node) + " " + format_roundtrip(cap->capacitance) + "\n";
        } else if (const auto* ind = std::get_if<GroundInd>(&comp)) {
            out += "indg " + std::to_string(ind->node) + " " + format_roundtrip(ind->inductance) + "\n";
        } else {
            const auto& vf = std::get<DirectedCoupling>(comp);
            out += "vfcap " + std::to_string(vf.input) + " " + std::to_string(vf.driven) + " " +
                   format_roundtrip(vf.capacitance) + "\n";
        }
    }
    return out;
}

} // namespace tlsim
