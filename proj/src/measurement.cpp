#include "tlsim/measurement.hpp"

#include "tlsim/errors.hpp"
#include "tlsim/rng.hpp"
#include "tlsim/textio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tlsim {

namespace {

double perturbed(double value, double bias, double tolerance, double draw, const char* what) {
    const double out = value * (1.0 + bias) * (1.0 + tolerance * draw);
    if (!(out > 0) || !std::isfinite(out))
        throw std::invalid_argument(std::string("perturbation produced a non-positive ") + what);
    return out;
}

Netlist realize(const Netlist& nominal, const NoiseModel& noise) {
    RngStream rng(noise.seed, 0);
    Netlist out(nominal.num_nodes(), nominal.label());
    for (const auto& c : nominal.components()) {
        const double g = rng.gaussian();
        if (const auto* cap = std::get_if<GroundCap>(&c)) {
            out.add(GroundCap{cap->node,
                              perturbed(cap->capacitance, noise.cap_bias, noise.cap_tolerance, g,
                                        "capacitance")});
        } else if (const auto* ind = std::get_if<GroundInd>(&c)) {
            out.add(GroundInd{ind->node,
                              perturbed(ind->inductance, noise.ind_bias, noise.ind_tolerance, g,
                                        "inductance")});
        } else {
            const auto& vf = std::get<DirectedCoupling>(c);
            out.add(DirectedCoupling{vf.input, vf.driven,
                                     perturbed(vf.capacitance, noise.cap_bias, noise.cap_tolerance,
                                               g, "capacitance")});
        }
    }
    return out;
}

} // namespace

MeasurementRun measure(const Netlist& nominal, const FrequencySpec& freq, const DriveConfig& drive,
                       const NoiseModel& noise) {
    if (!(drive.source_amplitude > 0)) throw std::invalid_argument("drive amplitude must be positive");
    if (drive.mode == DriveMode::SeriesResistor && !(drive.series_resistance > 0))
        throw std::invalid_argument("series resistance must be positive");
    if (!(noise.cap_tolerance >= 0) || !(noise.ind_tolerance >= 0))
        throw std::invalid_argument("tolerances must be non-negative");

    MeasurementRun run{CMatrix{}, realize(nominal, noise), CMatrix{}, std::nullopt, drive, noise,
                       freq.omega};

    const AdmittanceMatrix j_real = assemble(run.realized, freq);
    const int n = j_real.entries.rows();

    const double cond = condition_1norm(j_real.entries);
    if (!(cond <= 1e12))
        throw SingularMatrixError("realized admittance matrix is singular or near-singular "
                                  "(condition estimate " +
                                  format_sig(cond, 3) + "): the drive frequency " +
                                  format_sig(freq.hertz, 6) + " Hz sits at a lattice resonance");

    const LuFactors lu = lu_factor(j_real.entries);
    const double noise_factor = std::pow(10.0, -noise.voltage_snr_db / 20.0);

    run.impedance = CMatrix(n, n);
    std::vector<Complex> unit(n);
    for (int col = 0; col < n; ++col) {
        unit.assign(n, Complex{});
        unit[col] = 1.0;
        const std::vector<Complex> v0 = lu.solve(unit); // J^{-1} e_col

        std::vector<Complex> v(n);
        if (drive.mode == DriveMode::IdealCurrent) {
            for (int m = 0; m < n; ++m) v[m] = drive.source_amplitude * v0[m];
        } else {
            // Source V behind R enters as a 1/R ground conductance at the
            // driven node plus an injected current V/R; one Sherman-Morrison
            // correction of the shared factorization covers the rank-1 edit.
            const double r = drive.series_resistance;
            const Complex denom = 1.0 + v0[col] / r;
            const Complex s = drive.source_amplitude / r;
            for (int m = 0; m < n; ++m) v[m] = s * v0[m] / denom;
        }

        // Readings are noisy; the drive column id fixes the noise substream.
        RngStream rng(noise.seed, std::uint64_t(col) + 1);
        for (int m = 0; m < n; ++m) v[m] += noise_factor * std::abs(v[m]) * rng.complex_gaussian();

        Complex delivered;
        if (drive.mode == DriveMode::IdealCurrent) {
            delivered = drive.source_amplitude;
        } else {
            delivered = (drive.source_amplitude - v[col]) / drive.series_resistance;
        }
        for (int m = 0; m < n; ++m) run.impedance(m, col) = v[m] / delivered;
    }

    run.j_recovered = invert(run.impedance);
    if (const auto meta = chain_meta(nominal)) {
        const Complex mu = mu_of(meta->params, freq);
        CMatrix jt = run.j_recovered;
        const Complex term = Complex(0.0, freq.omega) * mu;
        for (int i = 0; i < n; ++i) jt(i, i) += term;
        run.jtilde_recovered = std::move(jt);
    }
    return run;
}

namespace {

/// Phase-paired comparison between a measured multiset and the corrected
/// chain model; the model eigenvalues come from the closed form of the
/// balanced chain, with the nominal shift applied on both sides.
class CorrectionModel {
public:
    CorrectionModel(const std::vector<Complex>& measured_jtilde_eigs, const ChainParams& nominal,
                    const FrequencySpec& freq)
        : omega_(freq.omega), params_(nominal) {
        if (measured_jtilde_eigs.empty()) throw std::invalid_argument("empty eigenvalue list");
        validate_chain_params(nominal);
        if (nominal.balance_residual() > 1e-9 * (nominal.c0 + nominal.c1))
            throw std::invalid_argument("correction fit requires a balanced chain (C0+C1 = C2+C3)");
        const int n = nominal.sites;
        if (int(measured_jtilde_eigs.size()) != n)
            throw std::invalid_argument(
                "eigenvalue count does not match the chain size; no pairing possible");

        mu_nominal_ = 1.0 / (omega_ * omega_ * nominal.inductance) - (nominal.c0 + nominal.c1);
        const double delta = nominal.c2 == 0.0 ? 0.0 : nominal.c2 / nominal.c1;
        const double radius = delta == 0.0 ? 0.0 : std::pow(delta, 1.0 / n);
        z_.resize(n);
        for (int m = 1; m <= n; ++m)
            z_[m - 1] = std::polar(radius, 2.0 * std::numbers::pi * m / n);

        auto phase_less = [](const Complex& x, const Complex& y) {
            const double px = std::arg(x), py = std::arg(y);
            if (px != py) return px < py;
            return std::abs(x) < std::abs(y);
        };

        measured_ = measured_jtilde_eigs;
        std::sort(measured_.begin(), measured_.end(), phase_less);

        // Pairing order fixed once from the uncorrected model: corrections
        // within the bound displace each mode by far less than the 2*pi/N
        // phase spacing.
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        std::sort(order_.begin(), order_.end(), [&](int i, int j) {
            return phase_less(Complex(0.0, -omega_ * params_.c1) * z_[i],
                              Complex(0.0, -omega_ * params_.c1) * z_[j]);
        });
    }

    double objective(double ll, double lc) const {
        const int n = params_.sites;
        const Complex scale(0.0, -omega_ * params_.c1 * (1.0 + lc));
        const double mu_corr = 1.0 / (omega_ * omega_ * params_.inductance * (1.0 + ll)) -
                               (params_.c0 + params_.c1) * (1.0 + lc);
        const Complex shift_term(0.0, omega_ * (mu_nominal_ - mu_corr));
        double sum = 0.0;
        for (int k = 0; k < n; ++k)
            sum += std::norm(measured_[k] - (scale * z_[order_[k]] + shift_term));
        return sum;
    }

private:
    double omega_;
    ChainParams params_;
    double mu_nominal_ = 0;
    std::vector<Complex> z_;
    std::vector<Complex> measured_;
    std::vector<int> order_;
};

} // namespace

double correction_objective(const std::vector<Complex>& measured_jtilde_eigs,
                            const ChainParams& nominal, const FrequencySpec& freq, double lambda_l,
                            double lambda_c) {
    return CorrectionModel(measured_jtilde_eigs, nominal, freq).objective(lambda_l, lambda_c);
}

CorrectionFit fit_uniform_correction(const std::vector<Complex>& measured_jtilde_eigs,
                                     const ChainParams& nominal, const FrequencySpec& freq,
                                     double bound) {
    if (!(bound > 0)) throw std::invalid_argument("bound must be positive");
    const CorrectionModel model(measured_jtilde_eigs, nominal, freq);
    auto objective = [&](double ll, double lc) { return model.objective(ll, lc); };

    constexpr double kStep = 1e-4;
    const int half = int(std::floor(bound / kStep * (1.0 + 1e-12)));
    int best_il = 0, best_ic = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int il = -half; il <= half; ++il) {
        for (int ic = -half; ic <= half; ++ic) {
            const double val = objective(il * kStep, ic * kStep);
            if (val < best) {
                best = val;
                best_il = il;
                best_ic = ic;
            }
        }
    }

    double ll = best_il * kStep;
    double lc = best_ic * kStep;

    // One quadratic refinement from the 3x3 neighborhood (interior only).
    if (std::abs(best_il) < half && std::abs(best_ic) < half) {
        double f[3][3];
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                f[a + 1][b + 1] = objective((best_il + a) * kStep, (best_ic + b) * kStep);
        const double fx = (f[2][0] + f[2][1] + f[2][2] - f[0][0] - f[0][1] - f[0][2]) / (6 * kStep);
        const double fy = (f[0][2] + f[1][2] + f[2][2] - f[0][0] - f[1][0] - f[2][0]) / (6 * kStep);
        const double fxx =
            (f[0][0] + f[0][1] + f[0][2] + f[2][0] + f[2][1] + f[2][2] - 2 * (f[1][0] + f[1][1] + f[1][2])) /
            (3 * kStep * kStep);
        const double fyy =
            (f[0][0] + f[1][0] + f[2][0] + f[0][2] + f[1][2] + f[2][2] - 2 * (f[0][1] + f[1][1] + f[2][1])) /
            (3 * kStep * kStep);
        const double fxy = (f[2][2] - f[2][0] - f[0][2] + f[0][0]) / (4 * kStep * kStep);
        const double det = fxx * fyy - fxy * fxy;
        if (det > 0 && fxx > 0) {
            double dl = -(fx * fyy - fy * fxy) / det;
            double dc = -(fy * fxx - fx * fxy) / det;
            dl = std::clamp(dl, -kStep, kStep);
            dc = std::clamp(dc, -kStep, kStep);
            const double cand_ll = std::clamp(ll + dl, -bound, bound);
            const double cand_lc = std::clamp(lc + dc, -bound, bound);
            const double cand = objective(cand_ll, cand_lc);
            if (cand < best) {
                best = cand;
                ll = cand_ll;
                lc = cand_lc;
            }
        }
    }

    return CorrectionFit{ll, lc, best, bound};
}

std::string impedance_to_csv(const CMatrix& g) {
    std::string out = "row,col,re_ohm,im_ohm\n";
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                   format_sig(g(i, j).real()) + "," + format_sig(g(i, j).imag()) + "\n";
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    return out;
}

} // namespace

CMatrix impedance_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line).size() != 4)
        throw std::invalid_argument("impedance CSV: expected header row,col,re_ohm,im_ohm");

    struct Entry {
        int row, col;
        Complex v;
    };
    std::vector<Entry> entries;
    int max_index = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const auto row = f.size() == 4 ? parse_int(f[0]) : std::nullopt;
        const auto col = f.size() == 4 ? parse_int(f[1]) : std::nullopt;
        const auto re = f.size() == 4 ? parse_double(f[2]) : std::nullopt;
        const auto im = f.size() == 4 ? parse_double(f[3]) : std::nullopt;
        if (!row || !col || !re || !im || *row < 1 || *col < 1)
            throw std::invalid_argument("impedance CSV: malformed line " + std::to_string(lineno));
        entries.push_back({int(*row), int(*col), Complex(*re, *im)});
        max_index = std::max({max_index, int(*row), int(*col)});
    }
    if (entries.empty()) throw std::invalid_argument("impedance CSV: no entries");
    CMatrix g(max_index, max_index);
    for (const auto& e : entries) g(e.row - 1, e.col - 1) = e.v;
    return g;
}

std::vector<Complex> eigenvalues_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("eigenvalue CSV: empty input");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "index")
        throw std::invalid_argument("eigenvalue CSV: expected header index,re_S,im_S[,...]");

    std::vector<Complex> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const auto re = f.size() >= 3 ? parse_double(f[1]) : std::nullopt;
        const auto im = f.size() >= 3 ? parse_double(f[2]) : std::nullopt;
        if (!re || !im)
            throw std::invalid_argument("eigenvalue CSV: malformed line " + std::to_string(lineno));
        out.emplace_back(*re, *im);
    }
    if (out.empty()) throw std::invalid_argument("eigenvalue CSV: no entries");
    return out;
}

std::string measurement_sidecar_json(const MeasurementRun& run, const FrequencySpec& freq) {
    nlohmann::json j;
    j["omega_rad_per_s"] = run.omega;
    j["frequency_hz"] = freq.hertz;
    j["drive"]["mode"] = run.drive.mode == DriveMode::IdealCurrent ? "ideal" : "series";
    j["drive"]["source_amplitude"] = run.drive.source_amplitude;
    j["drive"]["series_resistance_ohm"] = run.drive.series_resistance;
    j["noise"]["cap_tolerance"] = run.noise.cap_tolerance;
    j["noise"]["ind_tolerance"] = run.noise.ind_tolerance;
    j["noise"]["cap_bias"] = run.noise.cap_bias;
    j["noise"]["ind_bias"] = run.noise.ind_bias;
    if (std::isfinite(run.noise.voltage_snr_db))
        j["noise"]["voltage_snr_db"] = run.noise.voltage_snr_db;
    else
        j["noise"]["voltage_snr_db"] = nullptr;
    j["noise"]["seed"] = run.noise.seed;
    return j.dump(2) + "\n";
}

} // namespace tlsim
