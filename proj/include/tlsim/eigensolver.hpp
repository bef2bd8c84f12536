#pragma once

#include "tlsim/cmatrix.hpp"

#include <limits>
#include <vector>

namespace tlsim {

enum class Normalization {
    FirstComponentOne, // psi_1 = 1, the ansatz convention
    MaxAbsOne,         // largest-magnitude component = 1
    UnitTwoNorm,       // ||v||_2 = 1, phase pinned on the largest component
};

struct SolverConfig {
    /// QR sweep budget per trailing eigenvalue position.
    int qr_max_sweeps = 60;
    /// Relative subdiagonal threshold for deflation.
    double deflation_tol = 100.0 * std::numeric_limits<double>::epsilon();
    /// Relative shift offset for inverse iteration; keeps the shifted matrix
    /// invertible while sitting next to the eigenvalue.
    double invit_shift_jitter = 1e-8;
    Normalization normalization = Normalization::MaxAbsOne;
};

struct Spectrum {
    /// Sorted by phase in (-pi, pi], ties by magnitude.
    std::vector<Complex> eigenvalues;
    /// Columns aligned with eigenvalues.
    CMatrix eigenvectors;
    /// ||A v - lambda v||_2 / ||A||_F per pair.
    std::vector<double> residuals;
    /// Set when eigenvalues nearly coincide (within 1e3 * eps * ||A||_F);
    /// the affected eigenvectors are intrinsically ill-determined.
    bool clustered = false;
};

/// Dense non-Hermitian eigendecomposition: unitary Hessenberg reduction,
/// shifted QR with deflation for the eigenvalues, then inverse iteration on
/// the original matrix for the eigenvectors. On cluster-free spectra each
/// pair gets a final Rayleigh-quotient polish (kept only when it lowers the
/// residual), which brings well-separated pairs to a few eps * ||A||.
/// Throws std::invalid_argument on non-square/non-finite input and
/// ConvergenceError if QR stalls past the sweep budget.
Spectrum eig(const CMatrix& a, const SolverConfig& cfg = {});

/// Stable sort by eigenvalue phase in (-pi, pi], ties by magnitude;
/// eigenvector columns and residuals are permuted consistently.
Spectrum sort_modes(Spectrum s);

} // namespace tlsim
