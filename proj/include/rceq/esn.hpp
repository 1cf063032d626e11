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

// Echo state network with a scalar complex input stream:
//
//     x[n] = act(W_res x[n-1] + W_in u[n]),   y[n] = W_out x[n],   x[-1] = 0.

#include "rceq/channel.hpp"
#include "rceq/numkit.hpp"
#include "rceq/ratfit.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rceq {

enum class Activation { Linear, SplitTanh };
enum class InitKind { Random, Optimum };

const char* to_string(Activation a);
const char* to_string(InitKind k);
Activation activation_from_string(const std::string& s);
InitKind init_kind_from_string(const std::string& s);

struct EsnModel {
    ComplexMatrix w_in;                 // n_nodes x d_in
    ComplexMatrix w_res;                // n_nodes x n_nodes
    std::optional<ComplexMatrix> w_out; // d_out x n_nodes
    Activation activation = Activation::SplitTanh;
    InitKind init_kind = InitKind::Random;
    std::size_t d_out = 1;

    std::size_t n_nodes() const noexcept { return w_res.rows(); }
    std::size_t d_in() const noexcept { return w_in.cols(); }
    bool diagonal_reservoir() const;
};

struct StateTrajectory {
    ComplexMatrix states; // n_nodes x T, column n is x[n]
    std::size_t washout = 0;

    std::size_t length() const noexcept { return states.cols(); }
};

/// W_in, W_res entries U(-1,1) + jU(-1,1); each W_res entry zeroed with
/// probability `sparsity`; W_res rescaled to the target spectral radius.
EsnModel init_random(std::size_t n_nodes, std::size_t d_in, std::size_t d_out, double spectral_radius_target,
                     double sparsity, RngStream& rng, Activation activation = Activation::SplitTanh);

/// W_in = residues stacked m-major, W_res = diag(poles) in the same order.
EsnModel init_optimum(const std::vector<PoleResidueSet>& weights, double rho_max = 0.999,
                      Activation activation = Activation::Linear);

StateTrajectory run_states(const EsnModel& model, std::span<const cplx> input, std::size_t washout = 0);

struct TrainResult {
    EsnModel model;
    double training_mse = 0.0;
};

/// Least-squares readout over columns [washout, T). `ridge` defaults to
/// default_ridge() of the state matrix; pass 0 for the plain pseudoinverse.
TrainResult train_readout(const EsnModel& model, const StateTrajectory& states, std::span<const cplx> targets,
                          std::optional<double> ridge = std::nullopt, const NumericTolerances& tol = {});

/// y[n] = W_out x[n] for every column of a trajectory.
ComplexVector apply_readout(const EsnModel& model, const StateTrajectory& states, std::size_t first = 0);

ComplexVector predict(const EsnModel& model, std::span<const cplx> input);

} // namespace rceq
