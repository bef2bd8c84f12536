#include "tlsim/laplacian.hpp"

#include "tlsim/textio.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace tlsim {

FrequencySpec::FrequencySpec(double f_hz) : hertz(f_hz), omega(2.0 * std::numbers::pi * f_hz) {
    if (!(f_hz > 0) || !std::isfinite(f_hz))
        throw std::invalid_argument("frequency must be positive and finite");
}

AdmittanceMatrix assemble(const Netlist& n, const FrequencySpec& freq) {
    const double w = freq.omega;
    AdmittanceMatrix out;
    out.omega = w;
    out.kind = MatrixKind::Raw;
    out.label = n.label();
    out.entries = CMatrix(n.num_nodes(), n.num_nodes());

    // Stamping follows the canonical component order, so structurally equal
    // netlists assemble to bitwise-identical matrices.
    const Netlist canon = n.canonical();
    for (const auto& c : canon.components()) {
        if (const auto* cap = std::get_if<GroundCap>(&c)) {
            out.entries(cap->node - 1, cap->node - 1) += Complex(0.0, w * cap->capacitance);
        } else if (const auto* ind = std::get_if<GroundInd>(&c)) {
            out.entries(ind->node - 1, ind->node - 1) += Complex(0.0, -1.0 / (w * ind->inductance));
        } else {
            const auto& vf = std::get<DirectedCoupling>(c);
            const Complex y(0.0, w * vf.capacitance);
            out.entries(vf.driven - 1, vf.driven - 1) += y;
            out.entries(vf.driven - 1, vf.input - 1) -= y;
        }
    }
    return out;
}

Complex mu_of(const ChainParams& p, const FrequencySpec& freq) {
    const double w = freq.omega;
    return Complex(1.0 / (w * w * p.inductance) - (p.c1 + p.c0), 0.0);
}

AdmittanceMatrix shifted(const AdmittanceMatrix& raw, Complex mu) {
    if (!raw.entries.square()) throw std::invalid_argument("shift requires a square matrix");
    AdmittanceMatrix out = raw;
    out.kind = MatrixKind::Shifted;
    const Complex term = Complex(0.0, raw.omega) * mu;
    for (int i = 0; i < out.entries.rows(); ++i) out.entries(i, i) += term;
    return out;
}

AdmittanceMatrix assemble_shifted_chain(const ChainParams& p, const FrequencySpec& freq) {
    validate_chain_params(p);
    const int n = p.sites;
    const double w = freq.omega;
    AdmittanceMatrix out;
    out.omega = w;
    out.kind = MatrixKind::Shifted;
    out.label = "chain N=" + std::to_string(n);
    out.entries = CMatrix(n, n);
    for (int m = 0; m + 1 < n; ++m) out.entries(m, m + 1) = Complex(0.0, -w * p.c1);
    if (p.c2 > 0) out.entries(n - 1, 0) = Complex(0.0, -w * p.c2);
    // Zero exactly when the capacitor sums balance.
    out.entries(n - 1, n - 1) = Complex(0.0, w * ((p.c2 + p.c3) - (p.c0 + p.c1)));
    return out;
}

std::string admittance_to_csv(const AdmittanceMatrix& m) {
    std::string out = "row,col,re_S,im_S\n";
    for (int i = 0; i < m.entries.rows(); ++i)
        for (int j = 0; j < m.entries.cols(); ++j)
            out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                   format_sig(m.entries(i, j).real()) + "," + format_sig(m.entries(i, j).imag()) +
                   "\n";
    return out;
}

std::string admittance_to_json(const AdmittanceMatrix& m) {
    nlohmann::json j;
    j["omega_rad_per_s"] = m.omega;
    j["kind"] = m.kind == MatrixKind::Raw ? "raw" : "shifted";
    j["label"] = m.label;
    j["size"] = m.entries.rows();
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.entries.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < m.entries.cols(); ++k)
            row.push_back({m.entries(i, k).real(), m.entries(i, k).imag()});
        rows.push_back(std::move(row));
    }
    j["entries_S"] = std::move(rows);
    return j.dump(2) + "\n";
}

} // namespace tlsim
