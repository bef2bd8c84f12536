#include "tlsim/eigensolver.hpp"

#include "tlsim/errors.hpp"
#include "tlsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tlsim {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void validate_config(const SolverConfig& cfg) {
    if (cfg.qr_max_sweeps < 1) throw std::invalid_argument("qr_max_sweeps must be >= 1");
    if (!(cfg.deflation_tol > 0)) throw std::invalid_argument("deflation_tol must be > 0");
    if (!(cfg.invit_shift_jitter > 0)) throw std::invalid_argument("invit_shift_jitter must be > 0");
}

/// Unitary reduction to upper Hessenberg form via Householder reflectors.
void hessenberg_reduce(CMatrix& h) {
    const int n = h.rows();
    std::vector<Complex> v(n);
    for (int k = 0; k + 2 < n; ++k) {
        double below = 0.0;
        for (int i = k + 2; i < n; ++i) below += std::norm(h(i, k));
        if (below == 0.0) continue;

        const Complex x0 = h(k + 1, k);
        const double xnorm = std::sqrt(std::norm(x0) + below);
        const Complex phase = x0 == Complex{} ? Complex(1.0, 0.0) : x0 / std::abs(x0);
        const Complex alpha = -phase * xnorm;

        v[k + 1] = x0 - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
        double vnorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;
        const double vnorm = std::sqrt(vnorm2);
        for (int i = k + 1; i < n; ++i) v[i] /= vnorm;

        // Left: H <- (I - 2 v v^H) H on rows k+1..n-1.
        for (int j = k; j < n; ++j) {
            Complex w{};
            for (int i = k + 1; i < n; ++i) w += std::conj(v[i]) * h(i, j);
            w *= 2.0;
            for (int i = k + 1; i < n; ++i) h(i, j) -= v[i] * w;
        }
        // Right: H <- H (I - 2 v v^H) on columns k+1..n-1.
        for (int i = 0; i < n; ++i) {
            Complex w{};
            for (int j = k + 1; j < n; ++j) w += h(i, j) * v[j];
            w *= 2.0;
            for (int j = k + 1; j < n; ++j) h(i, j) -= w * std::conj(v[j]);
        }
        h(k + 1, k) = alpha;
        for (int i = k + 2; i < n; ++i) h(i, k) = Complex{};
    }
}

/// Eigenvalue of the trailing 2x2 block closer to the corner entry.
Complex wilkinson_shift(const CMatrix& h, int hi) {
    const Complex a = h(hi - 1, hi - 1);
    const Complex b = h(hi - 1, hi);
    const Complex c = h(hi, hi - 1);
    const Complex d = h(hi, hi);
    const Complex p = (a - d) * 0.5;
    const Complex q = std::sqrt(p * p + b * c);
    const Complex den = std::abs(p + q) >= std::abs(p - q) ? p + q : p - q;
    if (den == Complex{}) return d;
    return d - (b * c) / den;
}

/// Explicit single-shift QR step on the active window [lo, hi] using Givens
/// rotations; preserves Hessenberg structure.
void qr_sweep(CMatrix& h, int lo, int hi, Complex shift) {
    const int m = hi - lo + 1;
    std::vector<double> cs(m);
    std::vector<Complex> sn(m);

    for (int k = lo; k <= hi; ++k) h(k, k) -= shift;

    for (int k = lo; k < hi; ++k) {
        const Complex a = h(k, k);
        const Complex b = h(k + 1, k);
        double c;
        Complex s;
        if (b == Complex{}) {
            c = 1.0;
            s = Complex{};
        } else if (a == Complex{}) {
            c = 0.0;
            s = Complex(1.0, 0.0);
        } else {
            const double r = std::hypot(std::abs(a), std::abs(b));
            c = std::abs(a) / r;
            s = c * std::conj(b / a);
        }
        cs[k - lo] = c;
        sn[k - lo] = s;
        for (int j = k; j <= hi; ++j) {
            const Complex x = h(k, j);
            const Complex y = h(k + 1, j);
            h(k, j) = c * x + s * y;
            h(k + 1, j) = -std::conj(s) * x + c * y;
        }
    }
    for (int k = lo; k < hi; ++k) {
        const double c = cs[k - lo];
        const Complex s = sn[k - lo];
        for (int i = lo; i <= k + 1; ++i) {
            const Complex x = h(i, k);
            const Complex y = h(i, k + 1);
            h(i, k) = c * x + std::conj(s) * y;
            h(i, k + 1) = -s * x + c * y;
        }
    }

    for (int k = lo; k <= hi; ++k) h(k, k) += shift;
}

std::vector<Complex> qr_eigenvalues(CMatrix h, const SolverConfig& cfg, double norm_a) {
    const int n = h.rows();
    std::vector<Complex> evs(n);
    int hi = n - 1;
    int sweeps = 0;

    while (hi >= 0) {
        // Deflate negligible subdiagonals from the bottom of the active part.
        int lo = hi;
        while (lo > 0) {
            double scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (scale == 0.0) scale = norm_a;
            if (std::abs(h(lo, lo - 1)) <= cfg.deflation_tol * scale) {
                h(lo, lo - 1) = Complex{};
                break;
            }
            --lo;
        }
        if (lo == hi) {
            evs[hi] = h(hi, hi);
            --hi;
            sweeps = 0;
            continue;
        }
        if (sweeps >= cfg.qr_max_sweeps)
            throw ConvergenceError("QR did not converge at eigenvalue position " +
                                   std::to_string(hi + 1) + " of " + std::to_string(n) + " after " +
                                   std::to_string(sweeps) + " sweeps");
        ++sweeps;
        // Ad-hoc shift breaks symmetry-induced stalls every 10th sweep.
        const Complex shift = sweeps % 10 == 0
                                  ? h(hi, hi) + Complex(0.75 * std::abs(h(hi, hi - 1)), 0.0)
                                  : wilkinson_shift(h, hi);
        qr_sweep(h, lo, hi, shift);
    }
    return evs;
}

void normalize_state(std::vector<Complex>& v, Normalization convention) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < int(v.size()); ++i) {
        const double m = std::abs(v[i]);
        if (m > best) {
            best = m;
            imax = i;
        }
    }
    if (best == 0.0) return;

    switch (convention) {
    case Normalization::MaxAbsOne:
        break;
    case Normalization::FirstComponentOne:
        if (std::abs(v[0]) > 1e-12 * best) imax = 0;
        break;
    case Normalization::UnitTwoNorm: {
        const double nrm = norm2(v);
        const Complex phase = v[imax] / std::abs(v[imax]);
        const Complex factor = Complex(1.0, 0.0) / (phase * nrm);
        for (auto& z : v) z *= factor;
        return;
    }
    }
    const Complex pivot = v[imax];
    for (auto& z : v) z /= pivot;
}

} // namespace

Spectrum eig(const CMatrix& a, const SolverConfig& cfg) {
    validate_config(cfg);
    if (!a.square()) throw std::invalid_argument("eig requires a square matrix");
    if (!a.all_finite()) throw std::invalid_argument("eig requires finite entries");

    const int n = a.rows();
    Spectrum out;
    if (n == 0) return out;

    const double norm_a = a.frobenius_norm();
    if (norm_a == 0.0) {
        out.eigenvalues.assign(n, Complex{});
        out.eigenvectors = CMatrix::identity(n);
        out.residuals.assign(n, 0.0);
        out.clustered = n > 1;
        return out;
    }

    CMatrix h = a;
    hessenberg_reduce(h);
    out.eigenvalues = qr_eigenvalues(std::move(h), cfg, norm_a);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        const Complex& x = out.eigenvalues[i];
        const Complex& y = out.eigenvalues[j];
        const double px = std::arg(x), py = std::arg(y);
        if (px != py) return px < py;
        return std::abs(x) < std::abs(y);
    });
    {
        std::vector<Complex> sorted(n);
        for (int i = 0; i < n; ++i) sorted[i] = out.eigenvalues[order[i]];
        out.eigenvalues = std::move(sorted);
    }

    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < n; ++i)
        for (int j = i + 1; j < n; ++j)
            min_gap = std::min(min_gap, std::abs(out.eigenvalues[i] - out.eigenvalues[j]));
    out.clustered = n > 1 && min_gap < 1e3 * kEps * norm_a;

    // Eigenvectors by inverse iteration on the original matrix. For spectra
    // without clusters a final Rayleigh-quotient polish tightens each pair;
    // clustered spectra keep the raw QR eigenvalues (the pairs are
    // ill-conditioned there and the polish would only disguise that).
    const bool polish = !out.clustered;
    out.eigenvectors = CMatrix(n, n);
    out.residuals.assign(n, 0.0);
    for (int idx = 0; idx < n; ++idx) {
        const Complex lambda = out.eigenvalues[idx];

        LuFactors lu;
        for (int attempt = 0;; ++attempt) {
            Complex sigma = lambda * (1.0 + cfg.invit_shift_jitter);
            if (sigma == lambda) sigma = lambda + Complex(cfg.invit_shift_jitter * norm_a, 0.0);
            if (attempt > 0) sigma += Complex(attempt * cfg.invit_shift_jitter * norm_a, 0.0);
            CMatrix shifted = a;
            for (int i = 0; i < n; ++i) shifted(i, i) -= sigma;
            lu = lu_factor(shifted);
            if (!lu.singular || attempt >= 3) break;
        }

        RngStream rng(0x7c1e55u, std::uint64_t(idx));
        std::vector<Complex> v(n);
        for (auto& z : v) z = rng.complex_gaussian();
        {
            const double nv = norm2(v);
            for (auto& z : v) z /= nv;
        }

        std::vector<Complex> best_v = v;
        double best_res = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 10; ++it) {
            std::vector<Complex> w = lu.singular ? v : lu.solve_direction(v);
            const double nw = norm2(w);
            if (nw == 0.0 || !std::isfinite(nw)) break;
            for (auto& z : w) z /= nw;
            v = std::move(w);

            const std::vector<Complex> av = a * std::span<const Complex>(v);
            double rnorm2 = 0.0;
            for (int i = 0; i < n; ++i) rnorm2 += std::norm(av[i] - lambda * v[i]);
            const double res = std::sqrt(rnorm2) / norm_a;
            if (res < best_res) {
                best_res = res;
                best_v = v;
            }
            if (res <= 4.0 * kEps) break;
        }

        if (polish) {
            const std::vector<Complex> av = a * std::span<const Complex>(best_v);
            Complex num{};
            double den = 0.0;
            for (int i = 0; i < n; ++i) {
                num += std::conj(best_v[i]) * av[i];
                den += std::norm(best_v[i]);
            }
            const Complex rq = num / den;
            double rnorm2 = 0.0;
            for (int i = 0; i < n; ++i) rnorm2 += std::norm(av[i] - rq * best_v[i]);
            const double res_rq = std::sqrt(rnorm2) / norm_a;
            if (res_rq < best_res) {
                out.eigenvalues[idx] = rq;
                best_res = res_rq;
            }
        }

        normalize_state(best_v, cfg.normalization);
        for (int i = 0; i < n; ++i) out.eigenvectors(i, idx) = best_v[i];
        out.residuals[idx] = best_res;
    }
    // The polish may nudge phases across a sort boundary; restore the order.
    return sort_modes(std::move(out));
}

Spectrum sort_modes(Spectrum s) {
    const int n = int(s.eigenvalues.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        const Complex& x = s.eigenvalues[i];
        const Complex& y = s.eigenvalues[j];
        const double px = std::arg(x), py = std::arg(y);
        if (px != py) return px < py;
        return std::abs(x) < std::abs(y);
    });

    Spectrum out;
    out.clustered = s.clustered;
    out.eigenvalues.resize(n);
    out.residuals.resize(n);
    out.eigenvectors = CMatrix(s.eigenvectors.rows(), s.eigenvectors.cols());
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = s.eigenvalues[order[k]];
        out.residuals[k] = s.residuals.empty() ? 0.0 : s.residuals[order[k]];
        for (int i = 0; i < s.eigenvectors.rows(); ++i)
            out.eigenvectors(i, k) = s.eigenvectors(i, order[k]);
    }
    return out;
}

} // namespace tlsim
