#pragma once

#include "tlsim/cmatrix.hpp"
#include "tlsim/netlist.hpp"

#include <string>

namespace tlsim {

struct FrequencySpec {
    double hertz = 0;
    double omega = 0; // 2*pi*hertz

    /// Throws std::invalid_argument unless f is positive and finite.
    explicit FrequencySpec(double f_hz);
};

enum class MatrixKind { Raw, Shifted };

/// Node-space admittance matrix J(omega) in siemens, relating injected node
/// currents to node voltages, I = J V. `Shifted` marks J plus the uniform
/// i*omega*mu diagonal term.
struct AdmittanceMatrix {
    double omega = 0;
    MatrixKind kind = MatrixKind::Raw;
    CMatrix entries;
    std::string label;
};

/// Stamp assembly:
///   ground capacitor C at m:   J[m,m] += i*omega*C
///   ground inductor L at m:    J[m,m] += -i/(omega*L)
///   coupling (input s -> driven d, C): J[d,d] += i*omega*C, J[d,s] -= i*omega*C
/// The buffered input row s receives nothing; the coupling is one-way.
AdmittanceMatrix assemble(const Netlist& n, const FrequencySpec& freq);

/// Uniform shift coefficient mu(omega) = 1/(omega^2 L) - (C1 + C0).
Complex mu_of(const ChainParams& p, const FrequencySpec& freq);

/// J + i*omega*mu*I. Throws std::invalid_argument on a non-square input.
AdmittanceMatrix shifted(const AdmittanceMatrix& raw, Complex mu);

/// Chain-native shifted matrix, built directly so that the diagonal of a
/// balanced chain is exactly zero: -i*omega*C1 on the superdiagonal,
/// -i*omega*C2 in the corner, and i*omega*((C2+C3)-(C0+C1)) at (N,N).
AdmittanceMatrix assemble_shifted_chain(const ChainParams& p, const FrequencySpec& freq);

/// CSV rows `row,col,re_S,im_S` (1-based indices), 12 significant digits.
std::string admittance_to_csv(const AdmittanceMatrix& m);

/// JSON object with omega, kind, label and the dense entries.
std::string admittance_to_json(const AdmittanceMatrix& m);

} // namespace tlsim
