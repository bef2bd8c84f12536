#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tlsim {

// Node indices are 1-based throughout, matching the site labels n = 1..N.

/// Capacitor from a node to ground.
struct GroundCap {
    int node = 0;
    double capacitance = 0; // farads
};

/// Inductor from a node to ground. At most one per node.
struct GroundInd {
    int node = 0;
    double inductance = 0; // henrys
};

/// Unity-gain buffer sensing `input` and driving a series capacitor into
/// `driven`. The buffer input draws no current, so the coupling acts on the
/// driven node only.
struct DirectedCoupling {
    int input = 0;
    int driven = 0;
    double capacitance = 0; // farads
};

using Component = std::variant<GroundCap, GroundInd, DirectedCoupling>;

/// A circuit lattice: a node count and a list of grounded/coupling elements.
/// Immutable once built up; validation happens on every add().
class Netlist {
public:
    explicit Netlist(int num_nodes, std::string label = "");

    int num_nodes() const { return num_nodes_; }
    const std::string& label() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }
    const std::vector<Component>& components() const { return components_; }

    /// Validates node range, positive values, no self-coupling, and the
    /// one-inductor-per-node rule. Throws std::invalid_argument.
    void add(const Component& c);

    /// Canonical form: grounded capacitors merged per node, components in
    /// serialization order. Equality compares canonical forms; labels are
    /// presentation only and do not participate.
    Netlist canonical() const;
    friend bool operator==(const Netlist& a, const Netlist& b);

private:
    int num_nodes_ = 0;
    std::string label_;
    std::vector<Component> components_;
};

/// Parameters of the standard chain: bulk ground cap C0, bulk coupling C1,
/// boundary coupling C2 (0 = open chain), boundary ground cap C3, and the
/// grounded inductor L at every site.
struct ChainParams {
    int sites = 0;
    double c0 = 0, c1 = 0, c2 = 0, c3 = 0; // farads
    double inductance = 0;                 // henrys

    /// |(c1 + c0) - (c2 + c3)|; zero means the matrix shift is uniform.
    double balance_residual() const { return std::abs((c1 + c0) - (c2 + c3)); }
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate_chain_params(const ChainParams& p);

/// Builds the chain netlist: every node gets an inductor; nodes 1..N-1 get a
/// C0 ground cap and a coupling from node m+1 into node m; node N gets the C3
/// ground cap and, when C2 > 0, the corner coupling from node 1.
Netlist build_chain(const ChainParams& p);

struct ChainMeta {
    ChainParams params;
    double delta_t = 0; // c2 / c1
};

/// Recognizes netlists with the exact chain shape and recovers parameters.
/// Value matching is exact; returns nullopt for anything else (including
/// single-node netlists, where C0 and C3 cannot be told apart).
std::optional<ChainMeta> chain_meta(const Netlist& n);

/// Line-oriented text format:
///   nodes <N>
///   capg  <node> <farads>
///   indg  <node> <henrys>
///   vfcap <input_node> <driven_node> <farads>
/// '#' starts a comment; blank lines are ignored; numbers are plain or
/// scientific decimal. Throws ParseError with the offending line number.
Netlist parse_netlist(const std::string& text);

/// Canonical, reparseable text: capg (merged) then indg then vfcap, each
/// sorted; numbers printed with round-trip precision.
std::string serialize_netlist(const Netlist& n);

} // namespace tlsim
