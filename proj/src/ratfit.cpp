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

#include "rceq/ratfit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rceq {

RationalApprox::RationalApprox(ComplexVector numerator, ComplexVector denominator, double fit_error)
    : c_(std::move(numerator)), d_(std::move(denominator)), fit_error_(fit_error)
{
    if (c_.empty() || d_.empty())
        throw Error(ErrorKind::OrderError, "numerator and denominator must be non-empty");
    if (c_.size() - 1 >= d_.size())
        throw Error(ErrorKind::OrderError, "proper rational requires K' < K");
    if (!(fit_error_ >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "fit error must be non-negative");
    require_finite(c_, "numerator");
    require_finite(d_, "denominator");
}

std::size_t PoleResidueSet::stabilized_count() const
{
    return static_cast<std::size_t>(std::count(stabilized.begin(), stabilized.end(), true));
}

namespace {

// e^{-j 2 pi r k / N} with the phase index reduced mod N.
cplx grid_power(std::size_t r, std::size_t k, std::size_t n)
{
    const std::size_t idx = (r * k) % n;
    return std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(n));
}

} // namespace

double rational_fit_error(const RationalApprox& ra, std::span<const cplx> samples)
{
    const std::size_t n = samples.size();
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
        acc += std::norm(samples[r] - eval_rational(ra, w));
    }
    return 2.0 * std::numbers::pi / static_cast<double>(n) * acc;
}

RationalApprox fit_rational(std::span<const cplx> samples, std::size_t order, std::size_t numerator_order,
                            const RatfitOptions& opts)
{
    if (order == 0 || numerator_order >= order)
        throw Error(ErrorKind::OrderError, "require K >= 1 and K' < K");
    const std::size_t n = samples.size();
    const std::size_t unknowns = order + numerator_order + 1;
    if (n < unknowns)
        throw Error(ErrorKind::InvalidArgument, "need N >= K + K' + 1 frequency samples");
    require_finite(samples, "rational-fit samples");

    // Row r: [1 x .. x^K' | -f x .. -f x^K], x = e^{-j w_r}.
    ComplexMatrix a(n, unknowns);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k <= numerator_order; ++k)
            a(r, k) = grid_power(r, k, n);
        for (std::size_t k = 1; k <= order; ++k)
            a(r, numerator_order + k) = -samples[r] * grid_power(r, k, n);
    }

    ComplexVector coeffs;
    bool fallback = false;
    try {
        coeffs = ridge_pinv_solve(a, samples, 0.0, opts.numeric);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularSystem)
            throw;
        coeffs = ridge_pinv_solve(a, samples, default_ridge(a, opts.numeric), opts.numeric);
        fallback = true;
    }
    ComplexVector c(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(numerator_order + 1));
    ComplexVector d(coeffs.begin() + static_cast<std::ptrdiff_t>(numerator_order + 1), coeffs.end());
    RationalApprox ra(std::move(c), std::move(d));
    RationalApprox out(ra.numerator(), ra.denominator(), rational_fit_error(ra, samples));
    out.used_ridge_fallback = fallback;
    return out;
}

namespace {

double min_separation(const ComplexVector& p, std::vector<bool>* clustered, double threshold)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            const double d = std::abs(p[i] - p[j]);
            best = std::min(best, d);
            if (clustered && d < threshold)
                (*clustered)[i] = (*clustered)[j] = true;
        }
    return best;
}

} // namespace

PoleResidueSet partial_fractions(const RationalApprox& ra, const RatfitOptions& opts)
{
    const std::size_t k_order = ra.order();
    const auto& c = ra.numerator();
    const auto& d = ra.denominator();

    // Poles are the roots of p^K + d_1 p^(K-1) + ... + d_K (reversed denominator).
    ComplexVector reversed(k_order + 1);
    for (std::size_t i = 0; i < k_order; ++i)
        reversed[i] = d[k_order - 1 - i];
    reversed[k_order] = 1.0;

    PoleResidueSet prs;
    prs.poles = poly_roots(reversed, opts.numeric);
    std::sort(prs.poles.begin(), prs.poles.end(), [](cplx a, cplx b) {
        if (std::abs(a) != std::abs(b))
            return std::abs(a) > std::abs(b);
        return std::arg(a) < std::arg(b);
    });

    std::vector<bool> clustered(k_order, false);
    if (min_separation(prs.poles, &clustered, opts.min_pole_separation) < opts.min_pole_separation) {
        for (std::size_t i = 0; i < k_order; ++i)
            if (clustered[i])
                prs.poles[i] += opts.perturbation * std::polar(1.0, static_cast<double>(i));
        prs.perturbed = true;
        if (min_separation(prs.poles, nullptr, 0.0) < opts.min_pole_separation)
            throw Error(ErrorKind::RepeatedPoles, "poles remain clustered after perturbation");
    }

    // q_k = sum_i c_i p_k^(K-1-i) / prod_{j != k} (p_k - p_j)
    prs.residues.resize(k_order);
    for (std::size_t k = 0; k < k_order; ++k) {
        const cplx pk = prs.poles[k];
        cplx num{};
        cplx pw = 1.0;
        for (std::size_t e = 0; e < k_order; ++e) { // e = K-1-i
            const std::size_t i = k_order - 1 - e;
            if (i < c.size())
                num += c[i] * pw;
            pw *= pk;
        }
        cplx den = 1.0;
        for (std::size_t j = 0; j < k_order; ++j)
            if (j != k)
                den *= (pk - prs.poles[j]);
        prs.residues[k] = num / den;
    }
    prs.stabilized.assign(k_order, false);
    return prs;
}

PoleResidueSet stabilize_poles(const PoleResidueSet& prs, double rho_max)
{
    if (!(rho_max > 0.0 && rho_max < 1.0))
        throw Error(ErrorKind::InvalidArgument, "rho_max must lie in (0, 1)");
    PoleResidueSet out = prs;
    if (out.stabilized.size() != out.poles.size())
        out.stabilized.assign(out.poles.size(), false);
    for (std::size_t k = 0; k < out.poles.size(); ++k) {
        const double mag = std::abs(out.poles[k]);
        if (mag > rho_max) {
            out.poles[k] *= rho_max / mag;
            out.stabilized[k] = true;
        }
    }
    return out;
}

cplx eval_rational(const RationalApprox& ra, double omega)
{
    const cplx x = std::polar(1.0, -omega);
    const cplx num = poly_eval(ra.numerator(), x);
    cplx den{};
    for (std::size_t k = ra.order(); k-- > 0;)
        den = (den + ra.denominator()[k]) * x;
    den += 1.0;
    if (std::abs(den) <= 1e-12)
        throw Error(ErrorKind::NearPoleOnCircle, "denominator vanishes at w = " + std::to_string(omega));
    return num / den;
}

cplx eval_pf(const PoleResidueSet& prs, double omega)
{
    const cplx x = std::polar(1.0, -omega);
    cplx acc{};
    for (std::size_t k = 0; k < prs.poles.size(); ++k) {
        const cplx den = 1.0 - prs.poles[k] * x;
        if (std::abs(den) <= 1e-12)
            throw Error(ErrorKind::NearPoleOnCircle, "pole on the unit circle at w = " + std::to_string(omega));
        acc += prs.residues[k] / den;
    }
    return acc;
}

} // namespace rceq
