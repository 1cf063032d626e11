// SPDX-License-Identifier: Apache-2.0
//
// rceq - reservoir computing channel equalization for OFDM receivers
// Copyright (C) 2026 The rceq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Dense complex linear algebra and polynomial numerics shared by every module.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rceq {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;
using RealVector = std::vector<double>;

enum class ErrorKind {
    NonSymmetric,
    NoConvergence,
    SingularSystem,
    SpectralNull,
    BadProfile,
    OrderError,
    RepeatedPoles,
    NearPoleOnCircle,
    UnstablePole,
    DegenerateReservoir,
    ReadoutMissing,
    IndexOutOfRange,
    ShapeMismatch,
    LengthMismatch,
    SchemaError,
    ConfigError,
    InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. `kind()` lets callers
/// map failures to exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }
    /// what() without the kind prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

/// Iterative routine hit its cap. Carries the last iterate for diagnostics.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& what, ComplexVector best_iterate);
    const ComplexVector& best_iterate() const noexcept { return best_; }

private:
    ComplexVector best_;
};

class SpectralNullError : public Error {
public:
    SpectralNullError(std::size_t index, double magnitude);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Row-major dense matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw Error(ErrorKind::ShapeMismatch, "matrix data length does not match rows*cols");
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T> col(std::size_t c) const
    {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }
    void set_col(std::size_t c, std::span<const T> values)
    {
        if (values.size() != rows_)
            throw Error(ErrorKind::ShapeMismatch, "column length mismatch");
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, c) = values[r];
    }

    std::vector<T>& data() noexcept { return data_; }
    const std::vector<T>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

/// Tolerances and iteration caps used across numkit. Tests may tighten them.
struct NumericTolerances {
    double symmetry = 1e-10;          // relative, for sym_eig input check
    int jacobi_max_sweeps = 100;
    double singular_condition = 1e12; // cond(A^H A) ceiling when ridge == 0
    double root_residual = 1e-8;
    int root_max_iterations = 500;
    double spectral_rel_tol = 1e-6;
    int spectral_max_iterations = 2000;
    double ridge_scale = 1e-6;        // default ridge = scale * trace(A^H A) / cols
};

struct EigenResult {
    RealVector eigenvalues; // descending
    RealMatrix eigenvectors; // column i pairs with eigenvalues[i]
};

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
EigenResult sym_eig(const RealMatrix& a, const NumericTolerances& tol = {});

/// 1e-6 * trace(A^H A) / cols (scale configurable through `tol`).
double default_ridge(const ComplexMatrix& a, const NumericTolerances& tol = {});

/// Solves (A^H A + ridge I) x = A^H b.
ComplexVector ridge_pinv_solve(const ComplexMatrix& a, std::span<const cplx> b, double ridge,
                               const NumericTolerances& tol = {});

/// Horner evaluation; coefficients in ascending powers.
cplx poly_eval(std::span<const cplx> coeffs, cplx x);

/// Ascending coefficients of prod (x - r_i).
ComplexVector poly_from_roots(std::span<const cplx> roots);

/// All roots of the polynomial with ascending coefficients (c0 first), Aberth iteration.
ComplexVector poly_roots(std::span<const cplx> coeffs, const NumericTolerances& tol = {});

/// H[n] = sum_l h[l] exp(-j 2 pi n l / n_freq), n = 0..n_freq-1.
ComplexVector dft_response(std::span<const cplx> taps, std::size_t n_freq);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const ComplexMatrix& w, const NumericTolerances& tol = {});

// Small helpers used throughout the library.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& a);
ComplexVector matvec(const ComplexMatrix& a, std::span<const cplx> x);
double frobenius_norm(const ComplexMatrix& a);
double frobenius_norm(const RealMatrix& a);
double norm2(std::span<const cplx> v);
double norm2_squared(std::span<const cplx> v);
cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b); // sum conj(a_i) b_i

/// Throws InvalidArgument if any entry is NaN or Inf.
void require_finite(std::span<const cplx> v, const char* what);
void require_finite(std::span<const double> v, const char* what);

} // namespace rceq
