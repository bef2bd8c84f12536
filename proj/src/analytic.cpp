#include "tlsim/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tlsim {

namespace {

void validate(const LatticeSpec& spec) {
    if (spec.sites < 1) throw std::invalid_argument("lattice must have at least one site");
}

} // namespace

AnalyticSolution solve_analytic(const LatticeSpec& spec) {
    validate(spec);
    const int n = spec.sites;
    AnalyticSolution out;
    out.modes.reserve(n);

    if (spec.boundary_coupling == Complex{}) {
        // Open boundary: N-fold degenerate zero, all eigenvectors coalesce.
        out.exceptional_point = true;
        out.multiplicity = n;
        for (int m = 1; m <= n; ++m) {
            AnalyticMode mode;
            mode.index = m;
            mode.theta = 2.0 * std::numbers::pi * m / n;
            mode.z = Complex{};
            mode.energy = Complex{};
            mode.state.assign(n, Complex{});
            mode.state[0] = 1.0;
            out.modes.push_back(std::move(mode));
        }
        return out;
    }

    // Principal N-th root; the other roots follow by the N-th roots of unity.
    const double radius = std::pow(std::abs(spec.boundary_coupling), 1.0 / n);
    const double base_phase = std::arg(spec.boundary_coupling) / n;

    for (int m = 1; m <= n; ++m) {
        AnalyticMode mode;
        mode.index = m;
        mode.theta = 2.0 * std::numbers::pi * m / n;
        mode.z = std::polar(radius, base_phase + mode.theta);
        mode.energy = spec.hopping * mode.z;
        mode.state.resize(n);
        mode.state[0] = 1.0;
        for (int k = 1; k < n; ++k) mode.state[k] = mode.state[k - 1] * mode.z;
        out.modes.push_back(std::move(mode));
    }
    return out;
}

double skin_factor(const LatticeSpec& spec) {
    validate(spec);
    const double mag = std::abs(spec.boundary_coupling);
    if (mag == 0.0) return 0.0;
    return std::pow(mag, 1.0 / spec.sites);
}

} // namespace tlsim
