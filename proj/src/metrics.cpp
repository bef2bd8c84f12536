#include "tlsim/metrics.hpp"

#include "tlsim/analytic.hpp"
#include "tlsim/textio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tlsim {

double ipr(std::span<const Complex> state) {
    double p2 = 0.0, p4 = 0.0;
    for (const auto& z : state) {
        const double m2 = std::norm(z);
        p2 += m2;
        p4 += m2 * m2;
    }
    if (p2 == 0.0) throw std::invalid_argument("ipr: zero state");
    return p4 / (p2 * p2);
}

SkinFit fit_skin_factor(std::span<const Complex> state) {
    const int n = int(state.size());
    if (n == 0) throw std::invalid_argument("fit_skin_factor: empty state");
    for (const auto& z : state)
        if (std::abs(z) == 0.0) return {0.0, true};
    if (n == 1) return {1.0, false};

    // Least squares on log|psi_n| vs site index.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = i + 1;
        const double y = std::log(std::abs(state[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {std::exp(slope), false};
}

std::vector<StateProfile> state_profiles(const Spectrum& s) {
    const int n = s.eigenvectors.rows();
    std::vector<StateProfile> out;
    out.reserve(s.eigenvalues.size());
    for (int k = 0; k < int(s.eigenvalues.size()); ++k) {
        StateProfile p;
        p.mode = k + 1;
        p.abs_psi.resize(n);
        double maxabs = 0.0;
        for (int i = 0; i < n; ++i) {
            p.abs_psi[i] = std::abs(s.eigenvectors(i, k));
            maxabs = std::max(maxabs, p.abs_psi[i]);
        }
        if (maxabs > 0)
            for (auto& v : p.abs_psi) v /= maxabs;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ScanPoint> scan(const std::vector<int>& sizes, const std::vector<double>& deltas,
                            const ChainTemplate& tmpl, const FrequencySpec& freq,
                            const SolverConfig& cfg) {
    std::vector<ScanPoint> table;
    table.reserve(sizes.size() * deltas.size());

    for (const int n : sizes) {
        for (const double delta : deltas) {
            ScanPoint row;
            row.sites = n;
            row.delta_t = delta;
            try {
                ChainParams p;
                p.sites = n;
                p.c0 = tmpl.c0;
                p.c1 = tmpl.c1;
                p.inductance = tmpl.inductance;
                p.c2 = delta * tmpl.c1;
                p.c3 = (tmpl.c0 + tmpl.c1) - p.c2;
                if (p.c3 < 0)
                    throw std::invalid_argument("infeasible point: C3 < 0 (delta * C1 > C0 + C1)");

                const AdmittanceMatrix jt = assemble_shifted_chain(p, freq);
                const Spectrum spec = eig(jt.entries, cfg);

                LatticeSpec lattice;
                lattice.sites = n;
                lattice.hopping = Complex(0.0, -freq.omega * p.c1);
                lattice.boundary_coupling = delta;
                row.z_analytic = skin_factor(lattice);

                double fit_sum = 0.0, ipr_sum = 0.0, radius = 0.0;
                std::vector<Complex> column(n);
                for (int k = 0; k < n; ++k) {
                    for (int i = 0; i < n; ++i) column[i] = spec.eigenvectors(i, k);
                    const SkinFit fit = fit_skin_factor(column);
                    fit_sum += fit.z;
                    ipr_sum += ipr(column);
                    radius = std::max(radius, std::abs(spec.eigenvalues[k]));
                }
                row.z_fitted = fit_sum / n;
                row.ipr_mean = ipr_sum / n;
                row.spectral_radius = radius;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
                row.z_analytic = row.z_fitted = row.ipr_mean = row.spectral_radius =
                    std::numeric_limits<double>::quiet_NaN();
            }
            table.push_back(std::move(row));
        }
    }
    return table;
}

std::string scan_to_csv(const std::vector<ScanPoint>& table) {
    std::string out = "N,delta_t,z_analytic,z_fitted,ipr_mean,spectral_radius_S\n";
    for (const auto& row : table) {
        out += std::to_string(row.sites) + "," + format_sig(row.delta_t) + "," +
               format_sig(row.z_analytic) + "," + format_sig(row.z_fitted) + "," +
               format_sig(row.ipr_mean) + "," + format_sig(row.spectral_radius) + "\n";
    }
    return out;
}

std::string profiles_to_csv(const std::vector<StateProfile>& profiles) {
    std::string out = "mode,node,abs_psi\n";
    for (const auto& p : profiles)
        for (int i = 0; i < int(p.abs_psi.size()); ++i)
            out += std::to_string(p.mode) + "," + std::to_string(i + 1) + "," +
                   format_sig(p.abs_psi[i]) + "\n";
    return out;
}

} // namespace tlsim
