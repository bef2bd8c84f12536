#pragma once

#include "tlsim/cmatrix.hpp"
#include "tlsim/laplacian.hpp"
#include "tlsim/netlist.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tlsim {

enum class DriveMode {
    IdealCurrent,   // known current injected straight into the node
    SeriesResistor, // voltage source behind a series resistor; the delivered
                    // current is inferred from the measured node voltage
};

struct DriveConfig {
    DriveMode mode = DriveMode::IdealCurrent;
    double source_amplitude = 1.0;    // amperes (ideal) or volts (series)
    double series_resistance = 2000.; // ohms
};

/// Device-error and readout-noise model. Everything is derived from the seed
/// through fixed stream ids, so a run is reproducible bit for bit:
///   stream 0:    one Gaussian per component, in netlist order (capacitor
///                draws use cap_tolerance, inductor draws ind_tolerance);
///   stream n:    one complex Gaussian per node voltage reading for drive
///                column n = 1..N.
/// Draws are consumed even when their amplitude is zero, so toggling one
/// knob never reshuffles the others.
struct NoiseModel {
    double cap_tolerance = 0; // relative std-dev, drawn once per run
    double ind_tolerance = 0;
    double cap_bias = 0; // uniform relative offset on every capacitance
    double ind_bias = 0;
    double voltage_snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

struct MeasurementRun {
    CMatrix impedance; // G, ohms; column n = response to a drive at node n
    Netlist realized;  // the perturbed component values actually used
    CMatrix j_recovered;
    /// j_recovered + i*omega*mu*I with mu from the NOMINAL chain parameters
    /// (what an experimenter who only knows nominals would compute);
    /// absent when the nominal netlist is not a chain.
    std::optional<CMatrix> jtilde_recovered;
    DriveConfig drive;
    NoiseModel noise;
    double omega = 0;
};

/// Emulates the drive-one-node-at-a-time impedance measurement and the
/// inversion back to the admittance matrix.
/// Throws SingularMatrixError when the realized matrix is singular or its
/// condition estimate exceeds 1e12 (driving at a lattice resonance).
MeasurementRun measure(const Netlist& nominal, const FrequencySpec& freq, const DriveConfig& drive,
                       const NoiseModel& noise);

struct CorrectionFit {
    double lambda_l = 0; // uniform relative inductance correction
    double lambda_c = 0; // uniform relative capacitance correction
    double objective = 0;
    double bound = 0.02;
};

/// Uniform device-error fit: finds (lambda_l, lambda_c) within +-bound that
/// best match the measured shifted-matrix eigenvalues against the chain model
/// with L*(1+lambda_l) and every C*(1+lambda_c). Modes are paired by sorted
/// phase; the optimizer is a dense grid (step 1e-4) plus one local quadratic
/// refinement, so it is reproducible and gradient-free.
/// Requires a balanced nominal chain and len(measured) == sites.
CorrectionFit fit_uniform_correction(const std::vector<Complex>& measured_jtilde_eigs,
                                     const ChainParams& nominal, const FrequencySpec& freq,
                                     double bound = 0.02);

/// The fit objective at a specific correction pair: sum of squared distances
/// between phase-paired measured and model eigenvalues.
double correction_objective(const std::vector<Complex>& measured_jtilde_eigs,
                            const ChainParams& nominal, const FrequencySpec& freq, double lambda_l,
                            double lambda_c);

/// CSV `row,col,re_ohm,im_ohm` (1-based indices).
std::string impedance_to_csv(const CMatrix& g);
CMatrix impedance_from_csv(const std::string& text);

/// Eigenvalue list CSV: accepts `index,re_S,im_S` and the wider spectrum
/// format `index,re_S,im_S,abs_S,phase_rad`.
std::vector<Complex> eigenvalues_from_csv(const std::string& text);

/// JSON sidecar describing a measurement run (omega, drive, seed, tolerances).
std::string measurement_sidecar_json(const MeasurementRun& run, const FrequencySpec& freq);

} // namespace tlsim
