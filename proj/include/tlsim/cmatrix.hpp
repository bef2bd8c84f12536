#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tlsim {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. Problem sizes stay small (a few hundred
/// nodes at most), so plain dense O(N^3) arithmetic is used throughout.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols);
    static CMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
    const Complex& operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }

    CMatrix& operator+=(const CMatrix& rhs);
    CMatrix& operator-=(const CMatrix& rhs);
    CMatrix& operator*=(Complex s);

    friend CMatrix operator+(CMatrix lhs, const CMatrix& rhs) { return lhs += rhs; }
    friend CMatrix operator-(CMatrix lhs, const CMatrix& rhs) { return lhs -= rhs; }
    friend CMatrix operator*(CMatrix lhs, Complex s) { return lhs *= s; }

    CMatrix operator*(const CMatrix& rhs) const;
    std::vector<Complex> operator*(std::span<const Complex> v) const;

    double frobenius_norm() const;
    double one_norm() const; // max absolute column sum
    double max_abs() const;
    bool all_finite() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<Complex> a_;
};

/// LU factorization with partial pivoting.
struct LuFactors {
    CMatrix lu;
    std::vector<int> perm;
    bool singular = false;

    /// Exact solve; throws SingularMatrixError on a zero pivot.
    std::vector<Complex> solve(std::span<const Complex> b) const;

    /// Growth-guarded solve returning only the solution direction (the result
    /// is rescaled whenever entries approach overflow). Used by inverse
    /// iteration, where the shifted matrix is nearly singular on purpose.
    std::vector<Complex> solve_direction(std::span<const Complex> b) const;
};

LuFactors lu_factor(const CMatrix& a);

/// Inverse via LU; throws SingularMatrixError if the matrix is singular.
CMatrix invert(const CMatrix& a);

/// ||A||_1 * ||A^{-1}||_1 with the inverse computed explicitly.
double condition_1norm(const CMatrix& a);

double norm2(std::span<const Complex> v);

} // namespace tlsim
