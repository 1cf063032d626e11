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

#include "rceq/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace rceq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string join_msg(const std::string& a, double v)
{
    return a + " (" + std::to_string(v) + ")";
}

} // namespace

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::SpectralNull: return "SpectralNull";
    case ErrorKind::BadProfile: return "BadProfile";
    case ErrorKind::OrderError: return "OrderError";
    case ErrorKind::RepeatedPoles: return "RepeatedPoles";
    case ErrorKind::NearPoleOnCircle: return "NearPoleOnCircle";
    case ErrorKind::UnstablePole: return "UnstablePole";
    case ErrorKind::DegenerateReservoir: return "DegenerateReservoir";
    case ErrorKind::ReadoutMissing: return "ReadoutMissing";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what)
{
}

NoConvergenceError::NoConvergenceError(const std::string& what, ComplexVector best_iterate)
    : Error(ErrorKind::NoConvergence, what), best_(std::move(best_iterate))
{
}

SpectralNullError::SpectralNullError(std::size_t index, double magnitude)
    : Error(ErrorKind::SpectralNull, "frequency response magnitude " + std::to_string(magnitude) +
                                         " at sample index " + std::to_string(index)),
      index_(index)
{
}

void require_finite(std::span<const cplx> v, const char* what)
{
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains NaN/Inf");
}

void require_finite(std::span<const double> v, const char* what)
{
    for (double x : v)
        if (!std::isfinite(x))
            throw Error(ErrorKind::InvalidArgument, std::string(what) + " contains NaN/Inf");
}

// ---------------------------------------------------------------------------
// Basic products

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b)
{
    if (a.cols() != b.rows())
        throw Error(ErrorKind::ShapeMismatch, "matmul inner dimensions differ");
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto ci = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{})
                continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                ci[j] += aik * bk[j];
        }
    }
    return c;
}

ComplexMatrix adjoint(const ComplexMatrix& a)
{
    ComplexMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = std::conj(a(i, j));
    return t;
}

ComplexVector matvec(const ComplexMatrix& a, std::span<const cplx> x)
{
    if (a.cols() != x.size())
        throw Error(ErrorKind::ShapeMismatch, "matvec length mismatch");
    ComplexVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc{};
        auto ai = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j)
            acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

double frobenius_norm(const ComplexMatrix& a)
{
    double s = 0.0;
    for (const auto& z : a.data())
        s += std::norm(z);
    return std::sqrt(s);
}

double frobenius_norm(const RealMatrix& a)
{
    double s = 0.0;
    for (double x : a.data())
        s += x * x;
    return std::sqrt(s);
}

double norm2_squared(std::span<const cplx> v)
{
    double s = 0.0;
    for (const auto& z : v)
        s += std::norm(z);
    return s;
}

double norm2(std::span<const cplx> v) { return std::sqrt(norm2_squared(v)); }

cplx dot_conj(std::span<const cplx> a, std::span<const cplx> b)
{
    if (a.size() != b.size())
        throw Error(ErrorKind::LengthMismatch, "dot product of unequal lengths");
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::conj(a[i]) * b[i];
    return s;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)

EigenResult sym_eig(const RealMatrix& input, const NumericTolerances& tol)
{
    if (!input.square() || input.rows() == 0)
        throw Error(ErrorKind::ShapeMismatch, "sym_eig requires a non-empty square matrix");
    const std::size_t n = input.rows();
    require_finite(input.data(), "sym_eig input");

    double max_abs = 0.0;
    for (double x : input.data())
        max_abs = std::max(max_abs, std::abs(x));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) > tol.symmetry * max_abs)
                throw Error(ErrorKind::NonSymmetric,
                            "asymmetry at (" + std::to_string(i) + "," + std::to_string(j) + ")");

    RealMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a(i, j) = 0.5 * (input(i, j) + input(j, i));
    RealMatrix v = RealMatrix::identity(n);

    const double fro = frobenius_norm(a);
    bool converged = (n == 1) || fro == 0.0;
    for (int sweep = 0; sweep < tol.jacobi_max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * fro) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0)
                    continue;
                // Skip rotations that would be lost against the diagonal.
                if (sweep > 3 && std::abs(apq) < kEps * 1e-2 * std::min(std::abs(a(p, p)), std::abs(a(q, q)))) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) > 1e-12 * fro)
            throw NoConvergenceError("Jacobi sweep cap reached", {});
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenResult out{RealVector(n), RealMatrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        // Sign convention: largest-magnitude component positive.
        std::size_t arg = 0;
        for (std::size_t r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(arg, src)))
                arg = r;
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r)
            out.eigenvectors(r, c) = sign * v(r, src);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regularized least squares

double default_ridge(const ComplexMatrix& a, const NumericTolerances& tol)
{
    if (a.cols() == 0)
        return 0.0;
    double trace = 0.0;
    for (const auto& z : a.data())
        trace += std::norm(z);
    return tol.ridge_scale * trace / static_cast<double>(a.cols());
}

namespace {

ComplexVector solve_cholesky(ComplexMatrix g, ComplexVector rhs)
{
    const std::size_t n = g.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = g(j, j).real();
        for (std::size_t k = 0; k < j; ++k)
            d -= std::norm(g(j, k));
        if (!(d > 0.0))
            throw Error(ErrorKind::SingularSystem, "normal matrix is not positive definite");
        const double ljj = std::sqrt(d);
        g(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx s = g(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= g(i, k) * std::conj(g(j, k));
            g(i, j) = s / ljj;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        cplx s = rhs[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= g(i, k) * rhs[k];
        rhs[i] = s / g(i, i).real();
    }
    for (std::size_t ii = n; ii-- > 0;) {
        cplx s = rhs[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= std::conj(g(k, ii)) * rhs[k];
        rhs[ii] = s / g(ii, ii).real();
    }
    return rhs;
}

ComplexVector solve_householder_qr(ComplexMatrix a, ComplexVector b, const NumericTolerances& tol)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n)
        throw Error(ErrorKind::SingularSystem, "underdetermined system without ridge");
    std::vector<cplx> v(m);
    for (std::size_t k = 0; k < n; ++k) {
        double xnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i)
            xnorm2 += std::norm(a(i, k));
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0)
            throw Error(ErrorKind::SingularSystem, "zero column in least-squares matrix");
        const cplx x0 = a(k, k);
        const cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx{1.0, 0.0};
        const cplx alpha = -phase * xnorm;
        for (std::size_t i = k; i < m; ++i)
            v[i] = a(i, k);
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i)
            vnorm2 += std::norm(v[i]);
        if (vnorm2 > 0.0) {
            for (std::size_t j = k; j < n; ++j) {
                cplx s{};
                for (std::size_t i = k; i < m; ++i)
                    s += std::conj(v[i]) * a(i, j);
                s *= 2.0 / vnorm2;
                for (std::size_t i = k; i < m; ++i)
                    a(i, j) -= s * v[i];
            }
            cplx s{};
            for (std::size_t i = k; i < m; ++i)
                s += std::conj(v[i]) * b[i];
            s *= 2.0 / vnorm2;
            for (std::size_t i = k; i < m; ++i)
                b[i] -= s * v[i];
        }
        a(k, k) = alpha;
    }
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        rmax = std::max(rmax, std::abs(a(k, k)));
        rmin = std::min(rmin, std::abs(a(k, k)));
    }
    const double cond = rmin > 0.0 ? (rmax / rmin) * (rmax / rmin) : std::numeric_limits<double>::infinity();
    if (!(cond <= tol.singular_condition))
        throw Error(ErrorKind::SingularSystem, join_msg("normal-matrix condition estimate exceeds limit", cond));
    ComplexVector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        cplx s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j)
            s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

} // namespace

ComplexVector ridge_pinv_solve(const ComplexMatrix& a, std::span<const cplx> b, double ridge,
                               const NumericTolerances& tol)
{
    if (a.rows() == 0 || a.cols() == 0)
        throw Error(ErrorKind::ShapeMismatch, "empty least-squares matrix");
    if (b.size() != a.rows())
        throw Error(ErrorKind::LengthMismatch, "rhs length differs from matrix rows");
    if (!(ridge >= 0.0) || !std::isfinite(ridge))
        throw Error(ErrorKind::InvalidArgument, "ridge must be a finite non-negative number");
    require_finite(a.data(), "least-squares matrix");
    require_finite(b, "least-squares rhs");

    if (ridge == 0.0)
        return solve_householder_qr(a, ComplexVector(b.begin(), b.end()), tol);

    const std::size_t m = a.rows(), n = a.cols();
    ComplexMatrix g(n, n);
    ComplexVector rhs(n);
    // Lower triangle of A^H A; the Cholesky routine only reads that half.
    for (std::size_t r = 0; r < m; ++r) {
        auto ar = a.row(r);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx ai = ar[i];
            if (ai == cplx{})
                continue;
            const cplx cai = std::conj(ai);
            auto gi = g.row(i);
            for (std::size_t j = 0; j <= i; ++j)
                gi[j] += ar[j] * cai;
            rhs[i] += cai * b[r];
        }
    }
    // g(i, j) now holds sum conj(a_ri) a_rj for j <= i, i.e. the lower half of A^H A.
    for (std::size_t i = 0; i < n; ++i)
        g(i, i) += ridge;
    return solve_cholesky(std::move(g), std::move(rhs));
}

// ---------------------------------------------------------------------------
// Polynomials

cplx poly_eval(std::span<const cplx> coeffs, cplx x)
{
    cplx acc{};
    for (std::size_t i = coeffs.size(); i-- > 0;)
        acc = acc * x + coeffs[i];
    return acc;
}

ComplexVector poly_from_roots(std::span<const cplx> roots)
{
    ComplexVector c{cplx{1.0, 0.0}};
    for (const auto& r : roots) {
        ComplexVector next(c.size() + 1);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    return c;
}

ComplexVector poly_roots(std::span<const cplx> coeffs_in, const NumericTolerances& tol)
{
    require_finite(coeffs_in, "polynomial coefficients");
    if (coeffs_in.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "polynomial degree must be >= 1");
    if (std::abs(coeffs_in.back()) <= 1e-12)
        throw Error(ErrorKind::InvalidArgument, "leading coefficient magnitude <= 1e-12");

    ComplexVector roots;
    // Exact zero roots are factored out up front.
    std::size_t low = 0;
    while (coeffs_in[low] == cplx{})
        ++low;
    roots.assign(low, cplx{});
    ComplexVector c(coeffs_in.begin() + static_cast<std::ptrdiff_t>(low), coeffs_in.end());
    const std::size_t deg = c.size() - 1;
    if (deg == 0)
        return roots;
    if (deg == 1) {
        roots.push_back(-c[0] / c[1]);
        return roots;
    }

    ComplexVector dc(deg);
    for (std::size_t i = 1; i <= deg; ++i)
        dc[i - 1] = c[i] * static_cast<double>(i);
    std::vector<double> abs_c(c.size());
    double max_c = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        abs_c[i] = std::abs(c[i]);
        max_c = std::max(max_c, abs_c[i]);
    }
    auto rounding_level = [&](cplx z) {
        const double az = std::abs(z);
        double acc = 0.0;
        for (std::size_t i = abs_c.size(); i-- > 0;)
            acc = acc * az + abs_c[i];
        return acc;
    };

    const double radius = std::pow(std::abs(c[0] / c[deg]), 1.0 / static_cast<double>(deg));
    ComplexVector z(deg);
    for (std::size_t k = 0; k < deg; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(deg) + 0.4;
        z[k] = std::polar(radius, angle);
    }

    std::vector<bool> done(deg, false);
    for (int it = 0; it < tol.root_max_iterations; ++it) {
        bool all_done = true;
        for (std::size_t k = 0; k < deg; ++k) {
            if (done[k])
                continue;
            const cplx pz = poly_eval(c, z[k]);
            if (std::abs(pz) <= 4.0 * kEps * rounding_level(z[k])) {
                done[k] = true;
                continue;
            }
            all_done = false;
            const cplx dpz = poly_eval(dc, z[k]);
            cplx repulse{};
            for (std::size_t j = 0; j < deg; ++j)
                if (j != k)
                    repulse += 1.0 / (z[k] - z[j]);
            const cplx ratio = pz / dpz;
            cplx w = ratio / (1.0 - ratio * repulse);
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
                w = ratio;
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
                w = cplx{1e-3 * (1.0 + std::abs(z[k])), 0.0};
            z[k] -= w;
            if (std::abs(w) <= 2.0 * kEps * std::abs(z[k]))
                done[k] = true;
        }
        if (all_done)
            break;
    }

    for (std::size_t k = 0; k < deg; ++k) {
        const double scale = std::pow(std::max(1.0, std::abs(z[k])), static_cast<double>(deg));
        if (!(std::abs(poly_eval(c, z[k])) <= tol.root_residual * max_c * scale))
            throw NoConvergenceError("Aberth iteration did not reach the residual bound", z);
    }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

// ---------------------------------------------------------------------------
// Spectral quantities

ComplexVector dft_response(std::span<const cplx> taps, std::size_t n_freq)
{
    if (taps.empty())
        throw Error(ErrorKind::InvalidArgument, "empty tap vector");
    if (n_freq < taps.size())
        throw Error(ErrorKind::InvalidArgument, "frequency sample count must be >= tap count");
    ComplexVector twiddle(n_freq);
    for (std::size_t i = 0; i < n_freq; ++i)
        twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_freq));
    ComplexVector out(n_freq);
    for (std::size_t n = 0; n < n_freq; ++n) {
        cplx acc{};
        for (std::size_t l = 0; l < taps.size(); ++l)
            acc += taps[l] * twiddle[(n * l) % n_freq];
        out[n] = acc;
    }
    return out;
}

double spectral_radius(const ComplexMatrix& w, const NumericTolerances& tol)
{
    if (!w.square() || w.rows() == 0)
        throw Error(ErrorKind::ShapeMismatch, "spectral_radius requires a non-empty square matrix");
    require_finite(w.data(), "spectral_radius input");
    const std::size_t n = w.rows();

    bool diagonal = true;
    for (std::size_t i = 0; i < n && diagonal; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && w(i, j) != cplx{}) {
                diagonal = false;
                break;
            }
    if (diagonal) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            r = std::max(r, std::abs(w(i, i)));
        return r;
    }

    // Gelfand: rho = lim ||W^k||^(1/k), evaluated at k = 2^j by normalized squaring.
    ComplexMatrix b = w;
    double log_scale = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::infinity();
    const int cap = std::min(tol.spectral_max_iterations, 1000);
    for (int j = 0; j < cap; ++j) {
        const double s = frobenius_norm(b);
        if (s == 0.0 || !std::isfinite(s))
            return 0.0;
        for (auto& z : b.data())
            z /= s;
        log_scale += std::log(s);
        const double est = std::exp(std::ldexp(log_scale, -j));
        if (j > 0) {
            delta = std::abs(est - prev);
            if (delta <= 1e-14 * est || j >= 1000)
                return est;
        }
        prev = est;
        b = matmul(b, b);
        log_scale *= 2.0;
    }
    if (delta <= tol.spectral_rel_tol * prev)
        return prev;
    throw NoConvergenceError("spectral radius estimate did not settle", {});
}

} // namespace rceq
