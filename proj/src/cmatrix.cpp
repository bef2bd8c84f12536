#include "tlsim/cmatrix.hpp"

#include "tlsim/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tlsim {

namespace {
// Cheap magnitude proxy used for pivot selection.
double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }
} // namespace

CMatrix::CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("matrix dimensions must be non-negative");
}

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw std::invalid_argument("matrix size mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw std::invalid_argument("matrix size mismatch");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
    for (auto& v : a_) v *= s;
    return *this;
}

CMatrix CMatrix::operator*(const CMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("matrix size mismatch");
    CMatrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int k = 0; k < cols_; ++k) {
            const Complex aik = (*this)(i, k);
            if (aik == Complex{}) continue;
            for (int j = 0; j < rhs.cols_; ++j) out(i, j) += aik * rhs(k, j);
        }
    }
    return out;
}

std::vector<Complex> CMatrix::operator*(std::span<const Complex> v) const {
    if (int(v.size()) != cols_) throw std::invalid_argument("matrix-vector size mismatch");
    std::vector<Complex> out(rows_);
    for (int i = 0; i < rows_; ++i) {
        Complex acc{};
        for (int j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

double CMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double CMatrix::one_norm() const {
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
        best = std::max(best, s);
    }
    return best;
}

double CMatrix::max_abs() const {
    double best = 0.0;
    for (const auto& v : a_) best = std::max(best, std::abs(v));
    return best;
}

bool CMatrix::all_finite() const {
    for (const auto& v : a_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

LuFactors lu_factor(const CMatrix& a) {
    if (!a.square()) throw std::invalid_argument("lu_factor: matrix must be square");
    const int n = a.rows();
    LuFactors f;
    f.lu = a;
    f.perm.resize(n);
    for (int i = 0; i < n; ++i) f.perm[i] = i;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = abs1(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = abs1(f.lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
        }
        const Complex pivot = f.lu(k, k);
        if (pivot == Complex{}) {
            f.singular = true;
            continue;
        }
        for (int i = k + 1; i < n; ++i) {
            const Complex m = f.lu(i, k) / pivot;
            f.lu(i, k) = m;
            if (m == Complex{}) continue;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}

std::vector<Complex> LuFactors::solve(std::span<const Complex> b) const {
    if (singular) throw SingularMatrixError("solve: matrix is singular");
    const int n = lu.rows();
    if (int(b.size()) != n) throw std::invalid_argument("solve: size mismatch");

    std::vector<Complex> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 1; i < n; ++i) {
        Complex acc = x[i];
        for (int j = 0; j < i; ++j) acc -= lu(i, j) * x[j];
        x[i] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
        Complex acc = x[i];
        for (int j = i + 1; j < n; ++j) acc -= lu(i, j) * x[j];
        x[i] = acc / lu(i, i);
    }
    return x;
}

std::vector<Complex> LuFactors::solve_direction(std::span<const Complex> b) const {
    const int n = lu.rows();
    if (int(b.size()) != n) throw std::invalid_argument("solve_direction: size mismatch");

    // Growth limit well inside the representable range; crossing it rescales
    // the partial solution, which leaves the direction intact.
    constexpr double kGrowthLimit = 1e140;
    constexpr double kShrink = 1e-140;

    std::vector<Complex> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (int i = 1; i < n; ++i) {
        Complex acc = x[i];
        for (int j = 0; j < i; ++j) acc -= lu(i, j) * x[j];
        x[i] = acc;
        if (abs1(x[i]) > kGrowthLimit)
            for (int j = 0; j <= i; ++j) x[j] *= kShrink;
    }
    const double scale = lu.max_abs();
    for (int i = n - 1; i >= 0; --i) {
        Complex acc = x[i];
        for (int j = i + 1; j < n; ++j) acc -= lu(i, j) * x[j];
        Complex pivot = lu(i, i);
        if (pivot == Complex{}) pivot = Complex(scale > 0 ? scale * 1e-300 : 1e-300, 0.0);
        x[i] = acc / pivot;
        if (abs1(x[i]) > kGrowthLimit)
            for (int j = i; j < n; ++j) x[j] *= kShrink;
    }
    return x;
}

CMatrix invert(const CMatrix& a) {
    const LuFactors f = lu_factor(a);
    if (f.singular) throw SingularMatrixError("invert: matrix is singular");
    const int n = a.rows();
    CMatrix inv(n, n);
    std::vector<Complex> e(n);
    for (int j = 0; j < n; ++j) {
        e.assign(n, Complex{});
        e[j] = 1.0;
        const auto col = f.solve(e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

double condition_1norm(const CMatrix& a) {
    try {
        return a.one_norm() * invert(a).one_norm();
    } catch (const SingularMatrixError&) {
        return std::numeric_limits<double>::infinity();
    }
}

double norm2(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

} // namespace tlsim
