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

#include "rceq/basis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace rceq {

RealVector stack_real_imag(std::span<const cplx> v)
{
    const std::size_t n = v.size();
    RealVector out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = v[i].real();
        out[n + i] = v[i].imag();
    }
    return out;
}

ComplexVector unstack_real_imag(std::span<const double> stacked)
{
    if (stacked.size() % 2 != 0)
        throw Error(ErrorKind::LengthMismatch, "stacked vector must have even length");
    const std::size_t n = stacked.size() / 2;
    ComplexVector out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = {stacked[i], stacked[n + i]};
    return out;
}

// ---------------------------------------------------------------------------

CovarianceAccumulator::CovarianceAccumulator(std::size_t dim)
    : dim_(dim), mean_(dim, 0.0), comoment_(dim * dim, 0.0)
{
    if (dim == 0)
        throw Error(ErrorKind::InvalidArgument, "covariance dimension must be positive");
}

void CovarianceAccumulator::add(std::span<const double> x)
{
    if (x.size() != dim_)
        throw Error(ErrorKind::LengthMismatch, "sample length differs from accumulator dimension");
    ++count_;
    const double inv = 1.0 / static_cast<double>(count_);
    thread_local RealVector before, after;
    before.resize(dim_);
    after.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        before[i] = x[i] - mean_[i];
        mean_[i] += before[i] * inv;
        after[i] = x[i] - mean_[i];
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        const double bi = before[i];
        double* row = comoment_.data() + i * dim_;
        for (std::size_t j = i; j < dim_; ++j)
            row[j] += bi * after[j];
    }
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other)
{
    if (other.dim_ != dim_)
        throw Error(ErrorKind::LengthMismatch, "cannot merge accumulators of different dimension");
    if (other.count_ == 0)
        return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_), nb = static_cast<double>(other.count_);
    const double n = na + nb;
    RealVector delta(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        delta[i] = other.mean_[i] - mean_[i];
    const double w = na * nb / n;
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i; j < dim_; ++j)
            comoment_[i * dim_ + j] += other.comoment_[i * dim_ + j] + w * delta[i] * delta[j];
    for (std::size_t i = 0; i < dim_; ++i)
        mean_[i] += delta[i] * nb / n;
    count_ += other.count_;
}

CovarianceEstimate CovarianceAccumulator::finish(bool centered) const
{
    if (count_ < 2)
        throw Error(ErrorKind::InvalidArgument, "covariance needs at least two samples");
    CovarianceEstimate est;
    est.sigma = RealMatrix(dim_, dim_);
    est.n_obs = count_;
    est.mean_tilde = mean_;
    est.centered = centered;
    est.undersampled = count_ < dim_;
    const double inv = 1.0 / static_cast<double>(count_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = i; j < dim_; ++j) {
            double v = comoment_[i * dim_ + j] * inv;
            if (!centered)
                v += mean_[i] * mean_[j];
            est.sigma(i, j) = v;
            est.sigma(j, i) = v;
        }
    return est;
}

CovarianceEstimate empirical_covariance(const std::vector<RealVector>& samples, bool centered)
{
    if (samples.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "covariance needs at least two samples");
    CovarianceAccumulator acc(samples.front().size());
    for (const auto& s : samples) {
        if (s.size() != acc.dim())
            throw Error(ErrorKind::LengthMismatch, "samples have unequal lengths");
        acc.add(s);
    }
    return acc.finish(centered);
}

// ---------------------------------------------------------------------------

BasisSet optimum_basis(const CovarianceEstimate& cov, std::size_t M, const NumericTolerances& tol)
{
    const std::size_t dim = cov.sigma.rows();
    if (dim == 0 || dim % 2 != 0)
        throw Error(ErrorKind::ShapeMismatch, "covariance dimension must be 2N");
    const std::size_t n = dim / 2;
    if (M == 0 || M > n)
        throw Error(ErrorKind::InvalidArgument, "basis size M must satisfy 1 <= M <= N");

    EigenResult eig = sym_eig(cov.sigma, tol);

    BasisSet basis;
    basis.N = n;
    basis.M = M;
    basis.centered = cov.centered;
    basis.eigenvalues = eig.eigenvalues;
    basis.mean = unstack_real_imag(cov.mean_tilde);
    basis.F = ComplexMatrix(n, M);

    // Complexify f = q[0..N) + j q[N..2N), then modified Gram-Schmidt (two passes).
    // Columns that are exactly dependent on retained ones are skipped.
    std::vector<ComplexVector> kept;
    for (std::size_t c = 0; c < dim && kept.size() < M; ++c) {
        ComplexVector f(n);
        for (std::size_t i = 0; i < n; ++i)
            f[i] = {eig.eigenvectors(i, c), eig.eigenvectors(n + i, c)};
        const double original = norm2(f);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : kept) {
                const cplx proj = dot_conj(q, f);
                for (std::size_t i = 0; i < n; ++i)
                    f[i] -= proj * q[i];
            }
        const double residual = norm2(f);
        if (!(residual > 1e-10 * original))
            continue;
        for (auto& z : f)
            z /= residual;
        kept.push_back(std::move(f));
    }
    if (kept.size() < M)
        throw Error(ErrorKind::SingularSystem, "could not extract M independent complex basis vectors");
    for (std::size_t m = 0; m < M; ++m)
        basis.F.set_col(m, kept[m]);
    return basis;
}

Projection project_reconstruct(const BasisSet& basis, std::span<const cplx> v)
{
    if (v.size() != basis.N || basis.F.rows() != basis.N)
        throw Error(ErrorKind::LengthMismatch, "vector length differs from basis dimension N");
    const std::size_t n = basis.N, m = basis.F.cols();
    ComplexVector centered_v(v.begin(), v.end());
    if (basis.centered)
        for (std::size_t i = 0; i < n; ++i)
            centered_v[i] -= basis.mean[i];

    Projection p;
    p.latent.assign(m, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
        auto fi = basis.F.row(i);
        for (std::size_t k = 0; k < m; ++k)
            p.latent[k] += std::conj(fi[k]) * centered_v[i];
    }
    p.reconstruction.assign(n, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
        auto fi = basis.F.row(i);
        cplx acc = basis.centered ? basis.mean[i] : cplx{};
        for (std::size_t k = 0; k < m; ++k)
            acc += fi[k] * p.latent[k];
        p.reconstruction[i] = acc;
        p.error += std::norm(v[i] - acc);
    }
    return p;
}

std::size_t epsilon_rank(std::span<const double> eigenvalues, double eps)
{
    if (!(eps >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "eps must be non-negative");
    return static_cast<std::size_t>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                                  [eps](double l) { return l > eps; }));
}

double mean_reconstruction_error(const BasisSet& basis, const std::vector<ComplexVector>& samples)
{
    if (samples.empty())
        throw Error(ErrorKind::InvalidArgument, "empty sample set");
    double total = 0.0;
    for (const auto& v : samples)
        total += project_reconstruct(basis, v).error;
    return total / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------

namespace {

template <typename Sink>
void for_each_inverse_sample(const ChannelStatistics& stats, const RngStream& rng, const EnsembleOptions& opts,
                             EnsembleCounters* counters, std::vector<Sink>& sinks,
                             void (*consume)(Sink&, const ComplexVector&))
{
    const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_size);
    const std::size_t n_chunks = (opts.n_obs + chunk - 1) / chunk;
    std::vector<std::size_t> rejections(n_chunks, 0);

    auto run_chunk = [&](std::size_t c) {
        RngStream stream = rng.split(c);
        const std::size_t begin = c * chunk, end = std::min(opts.n_obs, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) {
            ChannelRealization h = opts.min_phase_only ? sample_min_phase(stats, stream, &rejections[c])
                                                       : sample_channel(stats, stream);
            consume(sinks[c], channel_inverse_freq(h, opts.n_freq));
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, n_chunks));
    if (workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t c = w; c < n_chunks; c += workers)
                        run_chunk(c);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool)
            t.join();
        for (auto& e : errors)
            if (e)
                std::rethrow_exception(e);
    }
    if (counters)
        for (auto r : rejections)
            counters->min_phase_rejections += r;
}

} // namespace

std::vector<ComplexVector> sample_inverse_ensemble(const ChannelStatistics& stats, const RngStream& rng,
                                                   const EnsembleOptions& opts, EnsembleCounters* counters)
{
    const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_size);
    std::vector<std::vector<ComplexVector>> parts((opts.n_obs + chunk - 1) / chunk);
    for_each_inverse_sample<std::vector<ComplexVector>>(
        stats, rng, opts, counters, parts,
        [](std::vector<ComplexVector>& out, const ComplexVector& v) { out.push_back(v); });
    std::vector<ComplexVector> all;
    all.reserve(opts.n_obs);
    for (auto& p : parts)
        for (auto& v : p)
            all.push_back(std::move(v));
    return all;
}

CovarianceEstimate inverse_covariance(const ChannelStatistics& stats, const RngStream& rng,
                                      const EnsembleOptions& opts, bool centered, EnsembleCounters* counters)
{
    const std::size_t chunk = std::max<std::size_t>(1, opts.chunk_size);
    std::vector<CovarianceAccumulator> parts((opts.n_obs + chunk - 1) / chunk,
                                             CovarianceAccumulator(2 * opts.n_freq));
    for_each_inverse_sample<CovarianceAccumulator>(
        stats, rng, opts, counters, parts,
        [](CovarianceAccumulator& acc, const ComplexVector& v) { acc.add(stack_real_imag(v)); });
    CovarianceAccumulator total(2 * opts.n_freq);
    for (const auto& p : parts)
        total.merge(p);
    return total.finish(centered);
}

} // namespace rceq
