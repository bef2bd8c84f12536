#include "tlsim/cli.hpp"

#include "tlsim/analytic.hpp"
#include "tlsim/eigensolver.hpp"
#include "tlsim/errors.hpp"
#include "tlsim/laplacian.hpp"
#include "tlsim/measurement.hpp"
#include "tlsim/metrics.hpp"
#include "tlsim/netlist.hpp"
#include "tlsim/textio.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tlsim::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kTool = "tlsim";
constexpr const char* kVersion = "0.1.0";

struct InputFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputFileError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputFileError("cannot write " + p.string());
    out << content;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, ',')) out.push_back(field);
    return out;
}

ChainParams parse_chain_desc(const std::string& desc) {
    const auto f = split_commas(desc);
    if (f.size() != 6) throw std::invalid_argument("--chain expects N,C0,C1,C2,C3,L");
    const auto n = parse_int(f[0]);
    if (!n || *n < 1) throw std::invalid_argument("--chain: bad site count '" + f[0] + "'");
    ChainParams p;
    p.sites = int(*n);
    const char* names[] = {"C0", "C1", "C2", "C3", "L"};
    double* dest[] = {&p.c0, &p.c1, &p.c2, &p.c3, &p.inductance};
    for (int i = 0; i < 5; ++i) {
        const auto v = parse_double(f[i + 1]);
        if (!v) throw std::invalid_argument(std::string("--chain: bad ") + names[i] + " '" + f[i + 1] + "'");
        *dest[i] = *v;
    }
    validate_chain_params(p);
    return p;
}

struct SourceOpts {
    std::string netlist_path;
    std::string chain_desc;
};

Netlist load_netlist(const SourceOpts& src) {
    if (src.netlist_path.empty() == src.chain_desc.empty())
        throw std::invalid_argument("provide exactly one of --netlist and --chain");
    if (!src.chain_desc.empty()) return build_chain(parse_chain_desc(src.chain_desc));
    return parse_netlist(read_file(src.netlist_path));
}

/// Chain parameters for the shift: taken from --chain directly, recovered
/// from the netlist otherwise.
ChainParams require_chain_params(const SourceOpts& src, const Netlist& nl) {
    if (!src.chain_desc.empty()) return parse_chain_desc(src.chain_desc);
    const auto meta = chain_meta(nl);
    if (!meta) throw InputFileError("netlist does not match the chain template; the shifted matrix needs chain parameters");
    return meta->params;
}

void append_source_args(std::vector<std::string>& argv, const SourceOpts& src) {
    if (!src.chain_desc.empty()) {
        argv.push_back("--chain");
        argv.push_back(src.chain_desc);
    } else {
        argv.push_back("--netlist");
        argv.push_back(src.netlist_path);
    }
}

std::string spectrum_csv(const Spectrum& s) {
    std::string out = "index,re_S,im_S,abs_S,phase_rad\n";
    for (int k = 0; k < int(s.eigenvalues.size()); ++k) {
        const Complex v = s.eigenvalues[k];
        out += std::to_string(k + 1) + "," + format_sig(v.real()) + "," + format_sig(v.imag()) +
               "," + format_sig(std::abs(v)) + "," + format_sig(std::arg(v)) + "\n";
    }
    return out;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const std::vector<std::string>& argv, const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["tool"] = kTool;
    j["version"] = kVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["outputs"] = outputs;
    write_file(path, j.dump(2) + "\n");
}

/// Emit to stdout when no --out path is set; otherwise write the file plus a
/// manifest sitting next to it.
void deliver(const std::string& out_path, const std::string& content, const std::string& command,
             const std::vector<std::string>& argv) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    write_file(out_path, content);
    write_manifest(out_path + ".manifest.json", command, argv, {out_path});
}

Normalization parse_normalization(const std::string& name) {
    if (name == "max-abs") return Normalization::MaxAbsOne;
    if (name == "first-one") return Normalization::FirstComponentOne;
    if (name == "unit-norm") return Normalization::UnitTwoNorm;
    throw std::invalid_argument("unknown normalization '" + name + "'");
}

// ---------------------------------------------------------------- commands

int do_spectrum(const SourceOpts& src, double freq_hz, bool shifted, const std::string& out) {
    const Netlist nl = load_netlist(src);
    const FrequencySpec freq(freq_hz);
    const AdmittanceMatrix mat =
        shifted ? assemble_shifted_chain(require_chain_params(src, nl), freq) : assemble(nl, freq);
    const Spectrum s = eig(mat.entries);

    std::vector<std::string> argv = {"spectrum"};
    append_source_args(argv, src);
    argv.insert(argv.end(), {"--freq", format_roundtrip(freq_hz)});
    if (shifted) argv.push_back("--shifted");
    if (!out.empty()) argv.insert(argv.end(), {"--out", out});
    deliver(out, spectrum_csv(s), "spectrum", argv);
    return 0;
}

int do_states(const SourceOpts& src, double freq_hz, bool shifted, const std::string& norm,
              const std::string& out) {
    const Netlist nl = load_netlist(src);
    const FrequencySpec freq(freq_hz);
    const AdmittanceMatrix mat =
        shifted ? assemble_shifted_chain(require_chain_params(src, nl), freq) : assemble(nl, freq);
    SolverConfig cfg;
    cfg.normalization = parse_normalization(norm);
    const Spectrum s = eig(mat.entries, cfg);

    std::string csv = "mode,node,abs_psi\n";
    for (int k = 0; k < int(s.eigenvalues.size()); ++k)
        for (int i = 0; i < s.eigenvectors.rows(); ++i)
            csv += std::to_string(k + 1) + "," + std::to_string(i + 1) + "," +
                   format_sig(std::abs(s.eigenvectors(i, k))) + "\n";

    std::vector<std::string> argv = {"states"};
    append_source_args(argv, src);
    argv.insert(argv.end(), {"--freq", format_roundtrip(freq_hz), "--normalization", norm});
    if (shifted) argv.push_back("--shifted");
    if (!out.empty()) argv.insert(argv.end(), {"--out", out});
    deliver(out, csv, "states", argv);
    return 0;
}

int do_measure(const SourceOpts& src, double freq_hz, const std::string& drive_name, double r_ohm,
               double snr_db, double cap_tol, double ind_tol, double cap_bias, double ind_bias,
               std::uint64_t seed, const std::string& out_dir) {
    const Netlist nl = load_netlist(src);
    const FrequencySpec freq(freq_hz);

    DriveConfig drive;
    drive.mode = drive_name == "series" ? DriveMode::SeriesResistor : DriveMode::IdealCurrent;
    drive.series_resistance = r_ohm;

    NoiseModel noise;
    noise.cap_tolerance = cap_tol;
    noise.ind_tolerance = ind_tol;
    noise.cap_bias = cap_bias;
    noise.ind_bias = ind_bias;
    noise.voltage_snr_db = snr_db;
    noise.seed = seed;

    const MeasurementRun run = measure(nl, freq, drive, noise);
    const CMatrix& recovered = run.jtilde_recovered ? *run.jtilde_recovered : run.j_recovered;
    const Spectrum s = eig(recovered);

    const fs::path dir(out_dir);
    write_file(dir / "g_matrix.csv", impedance_to_csv(run.impedance));
    write_file(dir / "g_matrix.json", measurement_sidecar_json(run, freq));
    write_file(dir / "spectrum_recovered.csv", spectrum_csv(s));

    std::vector<std::string> argv = {"measure"};
    append_source_args(argv, src);
    argv.insert(argv.end(), {"--freq", format_roundtrip(freq_hz), "--drive", drive_name, "--r",
                             format_roundtrip(r_ohm)});
    if (std::isfinite(snr_db)) argv.insert(argv.end(), {"--snr-db", format_roundtrip(snr_db)});
    argv.insert(argv.end(), {"--cap-tol", format_roundtrip(cap_tol), "--ind-tol",
                             format_roundtrip(ind_tol), "--cap-bias", format_roundtrip(cap_bias),
                             "--ind-bias", format_roundtrip(ind_bias), "--seed",
                             std::to_string(seed), "--out", out_dir});
    write_manifest(dir / "manifest.json", "measure", argv,
                   {"g_matrix.csv", "g_matrix.json", "spectrum_recovered.csv"});
    return 0;
}

int do_scan(const std::string& n_list, const std::string& delta_list, const std::string& tmpl_desc,
            double freq_hz, const std::string& out) {
    std::vector<int> sizes;
    for (const auto& tok : split_commas(n_list)) {
        const auto v = parse_int(tok);
        if (!v || *v < 1) throw std::invalid_argument("--n-list: bad entry '" + tok + "'");
        sizes.push_back(int(*v));
    }
    std::vector<double> deltas;
    for (const auto& tok : split_commas(delta_list)) {
        const auto v = parse_double(tok);
        if (!v || *v < 0) throw std::invalid_argument("--delta-list: bad entry '" + tok + "'");
        deltas.push_back(*v);
    }
    const auto tf = split_commas(tmpl_desc);
    if (tf.size() != 3) throw std::invalid_argument("--chain-template expects C0,C1,L");
    ChainTemplate tmpl;
    const auto c0 = parse_double(tf[0]), c1 = parse_double(tf[1]), l = parse_double(tf[2]);
    if (!c0 || !c1 || !l) throw std::invalid_argument("--chain-template: malformed number");
    tmpl.c0 = *c0;
    tmpl.c1 = *c1;
    tmpl.inductance = *l;

    const FrequencySpec freq(freq_hz);
    const auto table = scan(sizes, deltas, tmpl, freq);
    for (const auto& row : table)
        if (!row.ok)
            std::cerr << "scan: N=" << row.sites << " delta_t=" << format_sig(row.delta_t, 6)
                      << ": " << row.error << "\n";

    std::vector<std::string> argv = {"scan",          "--n-list",         n_list,
                                     "--delta-list",  delta_list,         "--chain-template",
                                     tmpl_desc,       "--freq",           format_roundtrip(freq_hz)};
    if (!out.empty()) argv.insert(argv.end(), {"--out", out});
    deliver(out, scan_to_csv(table), "scan", argv);
    return 0;
}

int do_calibrate(const std::string& measured_path, const std::string& chain_desc, double freq_hz,
                 double bound, const std::string& out) {
    const ChainParams params = parse_chain_desc(chain_desc);
    const FrequencySpec freq(freq_hz);
    const std::string text = read_file(measured_path);

    std::vector<Complex> eigs;
    if (text.rfind("row,col", 0) == 0) {
        const CMatrix g = impedance_from_csv(text);
        CMatrix jt = invert(g);
        const Complex term = Complex(0.0, freq.omega) * mu_of(params, freq);
        for (int i = 0; i < jt.rows(); ++i) jt(i, i) += term;
        eigs = eig(jt).eigenvalues;
    } else if (text.rfind("index,", 0) == 0) {
        eigs = eigenvalues_from_csv(text);
    } else {
        throw InputFileError(measured_path + ": expected an impedance CSV (row,col,re_ohm,im_ohm) "
                                             "or an eigenvalue CSV (index,re_S,im_S)");
    }

    const CorrectionFit fit = fit_uniform_correction(eigs, params, freq, bound);
    nlohmann::json j;
    j["lambda_L"] = fit.lambda_l;
    j["lambda_C"] = fit.lambda_c;
    j["objective"] = fit.objective;
    j["bound"] = fit.bound;

    std::vector<std::string> argv = {"calibrate", "--measured", measured_path,       "--chain",
                                     chain_desc,  "--freq",     format_roundtrip(freq_hz),
                                     "--bound",   format_roundtrip(bound)};
    if (!out.empty()) argv.insert(argv.end(), {"--out", out});
    deliver(out, j.dump(2) + "\n", "calibrate", argv);
    return 0;
}

int do_rerun(const std::string& manifest_path, const std::string& out_dir) {
    const auto manifest = nlohmann::json::parse(read_file(manifest_path));
    if (!manifest.contains("argv") || !manifest["argv"].is_array())
        throw InputFileError(manifest_path + ": manifest has no argv array");
    std::vector<std::string> argv = manifest["argv"].get<std::vector<std::string>>();

    if (!out_dir.empty()) {
        const std::string command = manifest.value("command", "");
        for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
            if (argv[i] != "--out") continue;
            argv[i + 1] = command == "measure"
                              ? out_dir
                              : (fs::path(out_dir) / fs::path(argv[i + 1]).filename()).string();
        }
    }
    return run(argv);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Non-Hermitian circuit lattice toolkit: spectra, eigenstate profiles, "
                 "emulated impedance measurements, and parameter scans."};
    app.require_subcommand(1);

    SourceOpts src;
    double freq_hz = 0;
    bool shifted = false;
    std::string out_path;
    std::string normalization = "max-abs";

    auto add_source = [&](CLI::App* sub) {
        sub->add_option("--netlist", src.netlist_path, "netlist file");
        sub->add_option("--chain", src.chain_desc, "chain parameters N,C0,C1,C2,C3,L (SI units)");
        sub->add_option("--freq", freq_hz, "drive frequency in Hz")->required();
    };

    auto* sp = app.add_subcommand("spectrum", "Eigenvalues of the admittance matrix");
    add_source(sp);
    sp->add_flag("--shifted", shifted, "analyze the shifted matrix (zero diagonal for balanced chains)");
    sp->add_option("--out", out_path, "output CSV (default: stdout)");

    auto* st = app.add_subcommand("states", "Eigenstate magnitude profiles");
    add_source(st);
    st->add_flag("--shifted", shifted, "analyze the shifted matrix");
    st->add_option("--normalization", normalization, "max-abs | first-one | unit-norm")
        ->check(CLI::IsMember({"max-abs", "first-one", "unit-norm"}));
    st->add_option("--out", out_path, "output CSV (default: stdout)");

    std::string drive_name = "ideal";
    double r_ohm = 2000.0;
    double snr_db = std::numeric_limits<double>::infinity();
    double cap_tol = 0, ind_tol = 0, cap_bias = 0, ind_bias = 0;
    std::uint64_t seed = 0;
    std::string out_dir;

    auto* me = app.add_subcommand("measure", "Emulate the impedance measurement and recover the spectrum");
    add_source(me);
    me->add_option("--drive", drive_name, "drive mode")->check(CLI::IsMember({"ideal", "series"}));
    me->add_option("--r", r_ohm, "series resistance in ohms (series mode)");
    me->add_option("--snr-db", snr_db, "voltage reading SNR in dB (omit for noiseless)");
    me->add_option("--cap-tol", cap_tol, "relative capacitor tolerance (std-dev)");
    me->add_option("--ind-tol", ind_tol, "relative inductor tolerance (std-dev)");
    me->add_option("--cap-bias", cap_bias, "uniform relative capacitance offset");
    me->add_option("--ind-bias", ind_bias, "uniform relative inductance offset");
    me->add_option("--seed", seed, "master random seed");
    me->add_option("--out", out_dir, "output directory")->required();

    std::string n_list, delta_list, tmpl_desc;
    auto* sc = app.add_subcommand("scan", "Skin-effect metrics over an N x delta_t grid");
    sc->add_option("--n-list", n_list, "comma list of lattice sizes")->required();
    sc->add_option("--delta-list", delta_list, "comma list of boundary couplings")->required();
    sc->add_option("--chain-template", tmpl_desc, "C0,C1,L (SI units)")->required();
    sc->add_option("--freq", freq_hz, "drive frequency in Hz")->required();
    sc->add_option("--out", out_path, "output CSV (default: stdout)");

    std::string measured_path, chain_desc;
    double bound = 0.02;
    auto* ca = app.add_subcommand("calibrate", "Fit a uniform device-error correction");
    ca->add_option("--measured", measured_path, "impedance CSV or eigenvalue CSV")->required();
    ca->add_option("--chain", chain_desc, "nominal chain N,C0,C1,C2,C3,L")->required();
    ca->add_option("--freq", freq_hz, "drive frequency in Hz")->required();
    ca->add_option("--bound", bound, "correction bound (relative)");
    ca->add_option("--out", out_path, "output JSON (default: stdout)");

    std::string manifest_path, rerun_dir;
    auto* re = app.add_subcommand("rerun", "Re-run a command from its manifest");
    re->add_option("--manifest", manifest_path, "manifest JSON")->required();
    re->add_option("--out-dir", rerun_dir, "redirect outputs into this directory");

    std::vector<const char*> argv;
    argv.push_back(kTool);
    for (const auto& s : args) argv.push_back(s.c_str());

    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sp->parsed()) return do_spectrum(src, freq_hz, shifted, out_path);
        if (st->parsed()) return do_states(src, freq_hz, shifted, normalization, out_path);
        if (me->parsed())
            return do_measure(src, freq_hz, drive_name, r_ohm, snr_db, cap_tol, ind_tol, cap_bias,
                              ind_bias, seed, out_dir);
        if (sc->parsed()) return do_scan(n_list, delta_list, tmpl_desc, freq_hz, out_path);
        if (ca->parsed()) return do_calibrate(measured_path, chain_desc, freq_hz, bound, out_path);
        if (re->parsed()) return do_rerun(manifest_path, rerun_dir);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SingularMatrixError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace tlsim::cli
