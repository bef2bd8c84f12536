#pragma once

#include "tlsim/cmatrix.hpp"

#include <vector>

namespace tlsim {

/// Abstract unidirectional-hopping chain: N sites, hopping amplitude t on
/// |n><n+1|, and a boundary link t*delta on |N><1|. delta = 0 is the open
/// chain, delta = 1 the periodic ring.
struct LatticeSpec {
    int sites = 0;
    Complex hopping{1.0, 0.0};
    Complex boundary_coupling{1.0, 0.0};
};

/// One closed-form eigenmode. The state is the geometric profile
/// psi_n = z^{n-1} with psi_1 = 1.
struct AnalyticMode {
    int index = 0;    // m = 1..N
    double theta = 0; // 2*pi*m/N
    Complex z{};      // principal N-th root of delta times e^{i theta}
    Complex energy{}; // t * z
    std::vector<Complex> state;
};

/// Full closed-form solution. At delta = 0 the spectrum collapses to an
/// N-fold degenerate zero with a single surviving eigenvector (1,0,...,0);
/// the solution still lists N modes and reports the multiplicity.
struct AnalyticSolution {
    std::vector<AnalyticMode> modes; // ascending theta in (0, 2*pi]
    bool exceptional_point = false;
    int multiplicity = 1;
};

/// Closed-form spectrum and eigenstates of the chain.
/// Throws std::invalid_argument when sites < 1.
AnalyticSolution solve_analytic(const LatticeSpec& spec);

/// Common decay ratio |psi_{n+1}/psi_n| = |delta|^{1/N} shared by all modes.
/// 0 at the open boundary, 1 on the ring.
double skin_factor(const LatticeSpec& spec);

} // namespace tlsim
