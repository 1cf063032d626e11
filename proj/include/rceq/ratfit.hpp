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

// Rational approximation of a sampled frequency response in x = e^{-jw},
//
//     R(x) = (c_0 + c_1 x + ... + c_K' x^K') / (1 + d_1 x + ... + d_K x^K),   K' < K,
//
// and its expansion into single-pole sections sum_k q_k / (1 - p_k x).

#include "rceq/numkit.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rceq {

class RationalApprox {
public:
    /// Throws OrderError unless numerator degree < denominator order.
    RationalApprox(ComplexVector numerator, ComplexVector denominator, double fit_error = 0.0);

    const ComplexVector& numerator() const noexcept { return c_; }   // c_0..c_K'
    const ComplexVector& denominator() const noexcept { return d_; } // d_1..d_K (d_0 = 1 implicit)
    std::size_t order() const noexcept { return d_.size(); }             // K
    std::size_t numerator_order() const noexcept { return c_.size() - 1; } // K'
    double fit_error() const noexcept { return fit_error_; }

    bool used_ridge_fallback = false;

private:
    ComplexVector c_;
    ComplexVector d_;
    double fit_error_;
};

struct PoleResidueSet {
    ComplexVector poles;
    ComplexVector residues;
    std::vector<bool> stabilized;
    bool perturbed = false; // clustered roots were split apart

    std::size_t size() const noexcept { return poles.size(); }
    std::size_t stabilized_count() const;
};

struct RatfitOptions {
    double rho_max = 0.999;
    double min_pole_separation = 1e-8;
    double perturbation = 1e-6;
    NumericTolerances numeric{};
};

/// Linearized least-squares fit on the grid w_r = 2 pi r / N.
RationalApprox fit_rational(std::span<const cplx> samples, std::size_t order, std::size_t numerator_order,
                            const RatfitOptions& opts = {});

PoleResidueSet partial_fractions(const RationalApprox& ra, const RatfitOptions& opts = {});

/// Clamps |p| > rho_max to rho_max, keeping the phase; residues untouched.
PoleResidueSet stabilize_poles(const PoleResidueSet& prs, double rho_max);

cplx eval_rational(const RationalApprox& ra, double omega);
cplx eval_pf(const PoleResidueSet& prs, double omega);

/// (2 pi / N) sum_r |f_r - R(w_r)|^2.
double rational_fit_error(const RationalApprox& ra, std::span<const cplx> samples);

} // namespace rceq
