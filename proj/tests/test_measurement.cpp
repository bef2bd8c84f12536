#include "tlsim/measurement.hpp"

#include "tlsim/eigensolver.hpp"
#include "tlsim/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace tlsim;

namespace {

const FrequencySpec kFreq{100e3};

Netlist bench_netlist(int sites = 10) { return build_chain(test::bench_chain(sites, 10e-9, 220e-9)); }

double max_entry_diff(const CMatrix& a, const CMatrix& b) {
    double worst = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

} // namespace

TEST_CASE("noiseless run inverts back to the assembled matrix") {
    const Netlist nl = bench_netlist();
    const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, NoiseModel{});

    // G * J = I in the max norm.
    const CMatrix j_direct = assemble(nl, kFreq).entries;
    const CMatrix prod = run.impedance * j_direct;
    double worst = 0;
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 10; ++k)
            worst = std::max(worst, std::abs(prod(i, k) - (i == k ? Complex(1, 0) : Complex{})));
    CHECK(worst <= 1e-10 * 10);

    // Recovered shifted matrix equals the direct one.
    REQUIRE(run.jtilde_recovered.has_value());
    const auto meta = chain_meta(nl);
    const CMatrix jt_direct = shifted(assemble(nl, kFreq), mu_of(meta->params, kFreq)).entries;
    CHECK(max_entry_diff(*run.jtilde_recovered, jt_direct) <= 1e-10 * jt_direct.max_abs());
}

TEST_CASE("bias-only run matches a directly biased assembly") {
    NoiseModel noise;
    noise.cap_bias = -0.015;
    noise.ind_bias = +0.0054;
    const Netlist nl = bench_netlist();
    const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, noise);

    // Oracle: assemble the biased netlist directly.
    ChainParams biased = test::bench_chain(10, 10e-9, 220e-9);
    biased.c0 *= 1 - 0.015;
    biased.c1 *= 1 - 0.015;
    biased.c2 *= 1 - 0.015;
    biased.c3 *= 1 - 0.015;
    biased.inductance *= 1 + 0.0054;
    const CMatrix expected = assemble(build_chain(biased), kFreq).entries;
    CHECK(max_entry_diff(run.j_recovered, expected) <= 1e-9 * expected.max_abs());

    const Spectrum recovered = eig(run.j_recovered);
    const Spectrum oracle = eig(expected);
    CHECK(test::multiset_match_error(recovered.eigenvalues, oracle.eigenvalues) <=
          1e-9 * expected.max_abs());
}

TEST_CASE("fixed seed reproduces the impedance matrix bit for bit") {
    NoiseModel noise;
    noise.cap_tolerance = 0.015;
    noise.ind_tolerance = 0.0054;
    noise.voltage_snr_db = 60.0;
    noise.seed = 1234567;

    const Netlist nl = bench_netlist(6);
    const MeasurementRun a = measure(nl, kFreq, DriveConfig{}, noise);
    const MeasurementRun b = measure(nl, kFreq, DriveConfig{}, noise);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(a.impedance(i, j) == b.impedance(i, j));

    noise.seed = 7654321;
    const MeasurementRun c = measure(nl, kFreq, DriveConfig{}, noise);
    CHECK(max_entry_diff(a.impedance, c.impedance) > 0);
}

TEST_CASE("component realization is independent of the voltage-noise setting") {
    NoiseModel a;
    a.cap_tolerance = 0.015;
    a.ind_tolerance = 0.0054;
    a.seed = 99;
    NoiseModel b = a;
    b.voltage_snr_db = 40.0;

    const Netlist nl = bench_netlist(5);
    const Netlist ra = measure(nl, kFreq, DriveConfig{}, a).realized;
    const Netlist rb = measure(nl, kFreq, DriveConfig{}, b).realized;
    CHECK(ra == rb);
    CHECK(serialize_netlist(ra) == serialize_netlist(rb));
}

TEST_CASE("ideal and series drives agree without noise") {
    const Netlist nl = bench_netlist();
    DriveConfig series;
    series.mode = DriveMode::SeriesResistor;
    series.series_resistance = 2000.0;
    series.source_amplitude = 1.0;

    const MeasurementRun a = measure(nl, kFreq, DriveConfig{}, NoiseModel{});
    const MeasurementRun b = measure(nl, kFreq, series, NoiseModel{});
    CHECK(max_entry_diff(a.impedance, b.impedance) <= 1e-9 * a.impedance.max_abs());
}

TEST_CASE("noise scale follows the SNR setting") {
    const Netlist nl = build_chain(test::bench_chain(4, 10e-9, 220e-9));
    const int seeds = 100;

    const MeasurementRun clean = measure(nl, kFreq, DriveConfig{}, NoiseModel{});

    for (const double snr : {40.0, 60.0, 80.0}) {
        // Mean relative std over entries, accumulated across seeds.
        std::vector<double> sum(16, 0.0), sum2(16, 0.0);
        std::vector<Complex> mean(16, Complex{});
        std::vector<CMatrix> runs;
        runs.reserve(seeds);
        for (int s = 0; s < seeds; ++s) {
            NoiseModel noise;
            noise.voltage_snr_db = snr;
            noise.seed = 1000 + s;
            runs.push_back(measure(nl, kFreq, DriveConfig{}, noise).impedance);
        }
        double ratio_sum = 0;
        int count = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                Complex m{};
                for (const auto& g : runs) m += g(i, j);
                m /= double(seeds);
                double var = 0;
                for (const auto& g : runs) var += std::norm(g(i, j) - m);
                var /= double(seeds - 1);
                ratio_sum += std::sqrt(var) / std::abs(clean.impedance(i, j));
                ++count;
            }
        const double measured = ratio_sum / count;
        const double expected = std::pow(10.0, -snr / 20.0);
        CHECK(measured > expected / 2);
        CHECK(measured < expected * 2);
    }
}

TEST_CASE("driving at the lattice resonance fails loudly") {
    // Open chain: the matrix is strictly triangular with mu on the diagonal,
    // so it is singular exactly where 1/(w^2 L) = C0 + C1.
    ChainParams p = test::bench_chain(5, 0.0, 0.0);
    p.c3 = p.c0 + p.c1;
    const double f_res = 1.0 / (2.0 * std::numbers::pi * std::sqrt(p.inductance * (p.c0 + p.c1)));
    CHECK_THROWS_AS((void)measure(build_chain(p), FrequencySpec(f_res), DriveConfig{}, NoiseModel{}),
                    SingularMatrixError);
}

TEST_CASE("uniform correction fit recovers synthetic offsets") {
    const ChainParams nominal = test::bench_chain(10, 10e-9, 220e-9);
    const Netlist nl = build_chain(nominal);

    SUBCASE("noiseless bias run") {
        NoiseModel noise;
        noise.cap_bias = -0.015;
        noise.ind_bias = +0.0054;
        const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, noise);
        REQUIRE(run.jtilde_recovered.has_value());
        const Spectrum s = eig(*run.jtilde_recovered);

        const CorrectionFit fit = fit_uniform_correction(s.eigenvalues, nominal, kFreq);
        CHECK(std::abs(fit.lambda_c - (-0.015)) <= 2e-4);
        CHECK(std::abs(fit.lambda_l - (+0.0054)) <= 2e-4);
        CHECK(std::abs(fit.lambda_l) <= fit.bound);
        CHECK(std::abs(fit.lambda_c) <= fit.bound);
    }

    SUBCASE("nominal data fits zero") {
        const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, NoiseModel{});
        const Spectrum s = eig(*run.jtilde_recovered);
        const CorrectionFit fit = fit_uniform_correction(s.eigenvalues, nominal, kFreq);
        CHECK(std::abs(fit.lambda_c) <= 1e-4);
        CHECK(std::abs(fit.lambda_l) <= 1e-4);
    }

    SUBCASE("small capacitor offset") {
        NoiseModel noise;
        noise.cap_bias = -0.002;
        noise.ind_bias = +0.0051;
        const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, noise);
        const Spectrum s = eig(*run.jtilde_recovered);
        const CorrectionFit fit = fit_uniform_correction(s.eigenvalues, nominal, kFreq);
        CHECK(std::abs(fit.lambda_c - (-0.002)) <= 2e-4);
        CHECK(std::abs(fit.lambda_l - (+0.0051)) <= 2e-4);
    }
}

TEST_CASE("fit never beats the generating offsets on clean data") {
    const ChainParams nominal = test::bench_chain(8, 30e-9, 200e-9);
    const Netlist nl = build_chain(nominal);
    NoiseModel noise;
    noise.cap_bias = 0.011;
    noise.ind_bias = -0.0032;
    const MeasurementRun run = measure(nl, kFreq, DriveConfig{}, noise);
    const Spectrum s = eig(*run.jtilde_recovered);

    const CorrectionFit fit = fit_uniform_correction(s.eigenvalues, nominal, kFreq);

    // Objective at the true offsets, same pairing rule.
    const double truth = correction_objective(s.eigenvalues, nominal, kFreq, -0.0032, 0.011);
    CHECK(fit.objective <= truth + 1e-12);
    CHECK(std::abs(fit.lambda_c - 0.011) <= 2e-4);
    CHECK(std::abs(fit.lambda_l - (-0.0032)) <= 2e-4);
}

TEST_CASE("fit input validation") {
    const ChainParams nominal = test::bench_chain(10, 10e-9, 220e-9);
    CHECK_THROWS_AS((void)fit_uniform_correction({}, nominal, kFreq), std::invalid_argument);
    CHECK_THROWS_AS((void)fit_uniform_correction(std::vector<Complex>(4), nominal, kFreq),
                    std::invalid_argument);
    const ChainParams unbalanced = test::bench_chain(10, 10e-9, 100e-9);
    CHECK_THROWS_AS(
        (void)fit_uniform_correction(std::vector<Complex>(10), unbalanced, kFreq),
        std::invalid_argument);
}

TEST_CASE("impedance csv round trip") {
    const MeasurementRun run = measure(bench_netlist(3), kFreq, DriveConfig{}, NoiseModel{});
    const std::string csv = impedance_to_csv(run.impedance);
    const CMatrix back = impedance_from_csv(csv);
    REQUIRE(back.rows() == 3);
    CHECK(max_entry_diff(back, run.impedance) <= 1e-11 * run.impedance.max_abs());
    CHECK_THROWS_AS((void)impedance_from_csv("bogus\n"), std::invalid_argument);
}

TEST_CASE("eigenvalue csv accepts both layouts") {
    const std::string narrow = "index,re_S,im_S\n1,0.5,-0.25\n2,-0.5,0.25\n";
    const auto a = eigenvalues_from_csv(narrow);
    REQUIRE(a.size() == 2);
    CHECK(a[0] == Complex(0.5, -0.25));

    const std::string wide = "index,re_S,im_S,abs_S,phase_rad\n1,1,0,1,0\n";
    const auto b = eigenvalues_from_csv(wide);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == Complex(1, 0));

    CHECK_THROWS_AS((void)eigenvalues_from_csv("foo\n1,2\n"), std::invalid_argument);
}
