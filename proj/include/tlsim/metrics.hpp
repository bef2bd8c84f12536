#pragma once

#include "tlsim/cmatrix.hpp"
#include "tlsim/eigensolver.hpp"
#include "tlsim/laplacian.hpp"

#include <span>
#include <string>
#include <vector>

namespace tlsim {

/// Inverse participation ratio: sum|psi|^4 / (sum|psi|^2)^2.
/// 1 for a single-site state, 1/N for a uniform one.
/// Throws std::invalid_argument on the zero vector.
double ipr(std::span<const Complex> state);

struct SkinFit {
    double z = 0;
    /// Set when a component magnitude is exactly zero (open-boundary limit);
    /// z is reported as 0 in that case.
    bool degenerate = false;
};

/// Decay ratio estimate: least-squares slope of log|psi_n| against n,
/// exponentiated. Exact geometric profiles are recovered to ~1e-12.
SkinFit fit_skin_factor(std::span<const Complex> state);

/// Per-mode magnitude profile, normalized to max-abs = 1.
struct StateProfile {
    int mode = 0; // 1-based, aligned with the spectrum ordering
    std::vector<double> abs_psi;
};

std::vector<StateProfile> state_profiles(const Spectrum& s);

struct ChainTemplate {
    double c0 = 0, c1 = 0; // farads
    double inductance = 0; // henrys
};

struct ScanPoint {
    int sites = 0;
    double delta_t = 0;
    double z_analytic = 0;
    double z_fitted = 0;
    double ipr_mean = 0;
    double spectral_radius = 0; // siemens
    bool ok = false;
    std::string error;
};

/// Grid scan over lattice sizes and boundary couplings. Each point builds the
/// chain with C2 = delta * C1 and C3 = C0 + C1 - C2, solves the shifted
/// matrix, and records skin factors, mean IPR, and the spectral radius.
/// Infeasible points (C3 < 0) become error rows; row order follows the grid
/// (sizes outer, couplings inner).
std::vector<ScanPoint> scan(const std::vector<int>& sizes, const std::vector<double>& deltas,
                            const ChainTemplate& tmpl, const FrequencySpec& freq,
                            const SolverConfig& cfg = {});

/// CSV with header `N,delta_t,z_analytic,z_fitted,ipr_mean,spectral_radius_S`;
/// error rows carry nan in the value columns.
std::string scan_to_csv(const std::vector<ScanPoint>& table);

/// CSV with header `mode,node,abs_psi`.
std::string profiles_to_csv(const std::vector<StateProfile>& profiles);

} // namespace tlsim
