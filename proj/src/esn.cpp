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

#include "rceq/esn.hpp"

#include <cmath>

namespace rceq {

const char* to_string(Activation a)
{
    return a == Activation::Linear ? "linear" : "split_tanh";
}

const char* to_string(InitKind k)
{
    return k == InitKind::Random ? "random" : "optimum";
}

Activation activation_from_string(const std::string& s)
{
    if (s == "linear")
        return Activation::Linear;
    if (s == "split_tanh" || s == "tanh")
        return Activation::SplitTanh;
    throw Error(ErrorKind::ConfigError, "unknown activation '" + s + "'");
}

InitKind init_kind_from_string(const std::string& s)
{
    if (s == "random")
        return InitKind::Random;
    if (s == "optimum")
        return InitKind::Optimum;
    throw Error(ErrorKind::ConfigError, "unknown init kind '" + s + "'");
}

bool EsnModel::diagonal_reservoir() const
{
    const std::size_t n = w_res.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && w_res(i, j) != cplx{})
                return false;
    return true;
}

EsnModel init_random(std::size_t n_nodes, std::size_t d_in, std::size_t d_out, double spectral_radius_target,
                     double sparsity, RngStream& rng, Activation activation)
{
    if (n_nodes == 0 || d_in == 0 || d_out == 0)
        throw Error(ErrorKind::InvalidArgument, "reservoir dimensions must be positive");
    if (!(spectral_radius_target > 0.0 && spectral_radius_target < 1.0))
        throw Error(ErrorKind::InvalidArgument, "spectral radius target must lie in (0, 1)");
    if (!(sparsity >= 0.0 && sparsity < 1.0))
        throw Error(ErrorKind::InvalidArgument, "sparsity must lie in [0, 1)");

    EsnModel m;
    m.activation = activation;
    m.init_kind = InitKind::Random;
    m.d_out = d_out;
    m.w_in = ComplexMatrix(n_nodes, d_in);
    for (auto& w : m.w_in.data())
        w = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    m.w_res = ComplexMatrix(n_nodes, n_nodes);
    for (auto& w : m.w_res.data()) {
        const cplx value{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        w = rng.uniform() < sparsity ? cplx{} : value;
    }
    const double rho = spectral_radius(m.w_res);
    if (rho < 1e-12)
        throw Error(ErrorKind::DegenerateReservoir, "sparsified reservoir has zero spectral radius");
    const double scale = spectral_radius_target / rho;
    for (auto& w : m.w_res.data())
        w *= scale;
    return m;
}

EsnModel init_optimum(const std::vector<PoleResidueSet>& weights, double rho_max, Activation activation)
{
    std::size_t n = 0;
    for (const auto& prs : weights) {
        if (prs.poles.size() != prs.residues.size())
            throw Error(ErrorKind::LengthMismatch, "pole and residue counts differ");
        for (const auto& p : prs.poles)
            if (std::abs(p) > rho_max)
                throw Error(ErrorKind::UnstablePole, "pole magnitude " + std::to_string(std::abs(p)) +
                                                         " exceeds rho_max");
        n += prs.poles.size();
    }
    if (n == 0)
        throw Error(ErrorKind::InvalidArgument, "no poles supplied");

    EsnModel m;
    m.activation = activation;
    m.init_kind = InitKind::Optimum;
    m.w_in = ComplexMatrix(n, 1);
    m.w_res = ComplexMatrix(n, n);
    std::size_t i = 0;
    for (const auto& prs : weights)
        for (std::size_t k = 0; k < prs.poles.size(); ++k, ++i) {
            m.w_in(i, 0) = prs.residues[k];
            m.w_res(i, i) = prs.poles[k];
        }
    return m;
}

namespace {

inline cplx activate(cplx a, Activation act)
{
    if (act == Activation::Linear)
        return a;
    return {std::tanh(a.real()), std::tanh(a.imag())};
}

} // namespace

StateTrajectory run_states(const EsnModel& model, std::span<const cplx> input, std::size_t washout)
{
    if (model.d_in() != 1)
        throw Error(ErrorKind::ShapeMismatch, "only scalar input streams are supported");
    const std::size_t n = model.n_nodes();
    const std::size_t t_len = input.size();
    if (t_len == 0)
        throw Error(ErrorKind::InvalidArgument, "empty input");
    if (washout >= t_len)
        throw Error(ErrorKind::InvalidArgument, "washout must be shorter than the input");

    StateTrajectory traj;
    traj.washout = washout;
    traj.states = ComplexMatrix(n, t_len);
    ComplexVector x(n), next(n);
    const ComplexVector w_in = model.w_in.col(0);

    if (model.diagonal_reservoir()) {
        ComplexVector p(n);
        for (std::size_t i = 0; i < n; ++i)
            p[i] = model.w_res(i, i);
        for (std::size_t t = 0; t < t_len; ++t) {
            const cplx u = input[t];
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = activate(p[i] * x[i] + w_in[i] * u, model.activation);
                traj.states(i, t) = x[i];
            }
        }
        return traj;
    }

    // Compressed rows; random reservoirs are mostly zeros.
    std::vector<std::size_t> row_start(n + 1, 0), cols;
    ComplexVector vals;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (model.w_res(i, j) != cplx{}) {
                cols.push_back(j);
                vals.push_back(model.w_res(i, j));
            }
        row_start[i + 1] = cols.size();
    }
    for (std::size_t t = 0; t < t_len; ++t) {
        const cplx u = input[t];
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = w_in[i] * u;
            for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e)
                acc += vals[e] * x[cols[e]];
            next[i] = activate(acc, model.activation);
        }
        x.swap(next);
        for (std::size_t i = 0; i < n; ++i)
            traj.states(i, t) = x[i];
    }
    return traj;
}

TrainResult train_readout(const EsnModel& model, const StateTrajectory& states, std::span<const cplx> targets,
                          std::optional<double> ridge, const NumericTolerances& tol)
{
    const std::size_t n = states.states.rows();
    const std::size_t t_len = states.length();
    if (n != model.n_nodes())
        throw Error(ErrorKind::ShapeMismatch, "trajectory does not match the model size");
    if (targets.size() != t_len)
        throw Error(ErrorKind::LengthMismatch, "targets length differs from trajectory length");
    if (states.washout >= t_len)
        throw Error(ErrorKind::InvalidArgument, "washout leaves no training samples");

    const std::size_t rows = t_len - states.washout;
    ComplexMatrix a(rows, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = states.states.row(i);
        for (std::size_t r = 0; r < rows; ++r)
            a(r, i) = src[states.washout + r];
    }
    const auto y = targets.subspan(states.washout);
    const double lambda = ridge ? *ridge : default_ridge(a, tol);
    const ComplexVector w = ridge_pinv_solve(a, y, lambda, tol);

    TrainResult out{model, 0.0};
    out.model.w_out = ComplexMatrix(1, n, w);
    out.model.d_out = 1;
    const ComplexVector fitted = matvec(a, w);
    double sse = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        sse += std::norm(fitted[r] - y[r]);
    out.training_mse = sse / static_cast<double>(rows);
    return out;
}

ComplexVector apply_readout(const EsnModel& model, const StateTrajectory& states, std::size_t first)
{
    if (!model.w_out)
        throw Error(ErrorKind::ReadoutMissing, "model has no trained readout");
    const auto& w = *model.w_out;
    const std::size_t n = states.states.rows();
    if (w.cols() != n || w.rows() != 1)
        throw Error(ErrorKind::ShapeMismatch, "readout does not match the trajectory");
    const std::size_t t_len = states.length();
    if (first > t_len)
        throw Error(ErrorKind::InvalidArgument, "first column past the end of the trajectory");
    ComplexVector out(t_len - first, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
        const cplx wi = w(0, i);
        auto src = states.states.row(i);
        for (std::size_t t = first; t < t_len; ++t)
            out[t - first] += wi * src[t];
    }
    return out;
}

ComplexVector predict(const EsnModel& model, std::span<const cplx> input)
{
    if (!model.w_out)
        throw Error(ErrorKind::ReadoutMissing, "model has no trained readout");
    return apply_readout(model, run_states(model, input));
}

} // namespace rceq
