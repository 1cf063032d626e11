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

// PCA of the frequency-domain channel inverse. Complex vectors are handled
// through their real-stacked form [Re v; Im v] and mapped back to C^N.

#include "rceq/channel.hpp"
#include "rceq/numkit.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rceq {

struct BasisSet {
    ComplexMatrix F;        // N x M, orthonormal columns
    RealVector eigenvalues; // full 2N spectrum of the real-stacked covariance, descending
    std::size_t M = 0;
    std::size_t N = 0;
    bool centered = false;
    ComplexVector mean;     // empirical mean of v, kept even when uncentered
};

struct CovarianceEstimate {
    RealMatrix sigma;       // 2N x 2N
    std::size_t n_obs = 0;
    RealVector mean_tilde;  // 2N
    bool centered = false;
    bool undersampled = false; // n_obs < dimension
};

RealVector stack_real_imag(std::span<const cplx> v);
ComplexVector unstack_real_imag(std::span<const double> stacked);

/// Streaming mean/co-moment accumulator (Welford); partial accumulators merge exactly.
class CovarianceAccumulator {
public:
    explicit CovarianceAccumulator(std::size_t dim);

    void add(std::span<const double> x);
    void merge(const CovarianceAccumulator& other);
    CovarianceEstimate finish(bool centered) const;

    std::size_t dim() const noexcept { return dim_; }
    std::size_t count() const noexcept { return count_; }

private:
    std::size_t dim_;
    std::size_t count_ = 0;
    RealVector mean_;
    RealVector comoment_; // upper triangle, row-major dim x dim
};

/// Centered: (1/n) sum (x - mean)(x - mean)^T. Uncentered: (1/n) sum x x^T.
CovarianceEstimate empirical_covariance(const std::vector<RealVector>& samples, bool centered);

/// Top-M real eigenvectors, complexified and re-orthonormalized in C^N.
BasisSet optimum_basis(const CovarianceEstimate& cov, std::size_t M, const NumericTolerances& tol = {});

struct Projection {
    ComplexVector latent;        // u, length M
    ComplexVector reconstruction; // v_hat, length N
    double error = 0.0;          // ||v - v_hat||^2
};

Projection project_reconstruct(const BasisSet& basis, std::span<const cplx> v);

/// Count of eigenvalues strictly above eps.
std::size_t epsilon_rank(std::span<const double> eigenvalues, double eps);

/// Mean reconstruction error over a sample set.
double mean_reconstruction_error(const BasisSet& basis, const std::vector<ComplexVector>& samples);

/// Options for drawing inverse-response ensembles from channel statistics.
struct EnsembleOptions {
    std::size_t n_freq = 128;
    std::size_t n_obs = 5000;
    bool min_phase_only = true;
    std::size_t chunk_size = 256;
    std::size_t workers = 1;
};

struct EnsembleCounters {
    std::size_t min_phase_rejections = 0;
};

/// Draws v = 1/H(e^{jw}) samples; realization i uses stream `rng.split(chunk)`
/// so the output is independent of the worker count.
std::vector<ComplexVector> sample_inverse_ensemble(const ChannelStatistics& stats, const RngStream& rng,
                                                   const EnsembleOptions& opts, EnsembleCounters* counters = nullptr);

/// Same draws as sample_inverse_ensemble, accumulated straight into a covariance.
CovarianceEstimate inverse_covariance(const ChannelStatistics& stats, const RngStream& rng,
                                      const EnsembleOptions& opts, bool centered,
                                      EnsembleCounters* counters = nullptr);

} // namespace rceq
