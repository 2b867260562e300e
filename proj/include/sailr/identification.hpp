// Copyright 2026 The SAILR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file identification.hpp
 * @brief Recovery of beta_I(t), A0 and I0 from isolated/recovered counts
 *        observed at t = 0 and t = T.
 *
 * The cost is
 *
 *     J = 1/2 (L(T) - LT)^2 + 1/2 (R(T) - RT)^2 + a1/2 int beta_I^2
 *         + a0/2 (A0^2 + I0^2 + (N0 - A0 - I0)^2),     N0 = N - (L0 + R0),
 *
 * minimized over beta_I >= 0 (a grid function) and (A0, I0) in the
 * triangle K0 = {A0 >= 0, I0 >= 0, A0 + I0 <= N0}.
 */

#ifndef SAILR_IDENTIFICATION_HPP
#define SAILR_IDENTIFICATION_HPP

#include "sailr/errors.hpp"
#include "sailr/integrator.hpp"
#include "sailr/model.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace sailr {

struct IdentWeights {
    double alpha0 = 1e-6;
    double alpha1 = 1e-6;
};

struct IdentConfig {
    std::size_t M      = 10000; ///< grid steps on [0, T]
    double beta_init   = 0.2;
    double tol         = 1e-6;
    int max_iters      = 200;
    int max_backtracks = 50;
    /// Projected-gradient sweeps before switching to the Newton phase.
    int gradient_iters = 25;
    int krylov_dim     = 30;
    /// Largest weight of the first continuation stage; the weights are then
    /// divided by ten per stage down to their configured values.
    double continuation_start = 1e-2;
    /// Residual at which an intermediate continuation stage is accepted.
    double stage_tol = 1e-3;
};

/// A point of the admissible set: beta_I on the identification grid plus
/// the initial infected classes.
struct IdentCandidate {
    CoefficientTable beta_I;
    double A0 = 0.0;
    double I0 = 0.0;

    double S0(double N0) const noexcept { return N0 - A0 - I0; }
};

struct IdentGradient {
    std::vector<double> beta; ///< L2 gradient sampled on the grid
    double A0 = 0.0;
    double I0 = 0.0;
};

struct IdentResult {
    IdentCandidate candidate;
    double cost = 0.0;
    std::vector<double> cost_history;
    double optimality_residual = 0.0;
    double mismatch            = 0.0; ///< (L(T)-LT)^2 + (R(T)-RT)^2
    Trajectory trajectory;
    AdjointTrajectory adjoint;
    int iterations     = 0;
    int gradient_steps = 0;
    int newton_steps   = 0;
    long forward_solves = 0;
    long adjoint_solves = 0;
    bool converged     = false;
    std::string status;
};

/// Identification problem data: model rates (beta_I is ignored), the
/// observations and the regularization weights.
struct IdentProblem {
    ModelParams params;
    Observations obs;
    IdentWeights weights;
    Grid grid;

    double N0() const noexcept { return params.N - (obs.L0 + obs.R0); }
    Vector5 initial_state(const IdentCandidate& c) const;
    ModelParams params_for(const IdentCandidate& c) const;
};

/// Builds a problem on the uniform grid [0, obs.T] with M steps.
IdentProblem make_ident_problem(const ModelParams& params, const Observations& obs, const IdentWeights& w,
                                std::size_t M);

/// Constraint violations of a candidate (empty when feasible).
std::vector<std::string> check_candidate(const IdentCandidate& c, const IdentProblem& prob);

double cost_p0(const IdentCandidate& c, const IdentProblem& prob);

/// Cost evaluated on an already computed trajectory of c.
double cost_p0(const IdentCandidate& c, const IdentProblem& prob, const Trajectory& traj);

/// gbeta = a1 beta - (p - q) S I,
/// gA0 = -[p(0) - q(0) - 2 a0 A0 + a0 N0 - a0 I0],
/// gI0 = -[p(0) - d(0) - 2 a0 I0 + a0 N0 - a0 A0].
IdentGradient gradient_p0(const IdentCandidate& c, const IdentProblem& prob);

IdentGradient gradient_p0(const IdentCandidate& c, const IdentProblem& prob, const Trajectory& traj,
                          const AdjointTrajectory& adj);

/// Pointwise max(0, g).
std::vector<double> project_kplus_grid(const std::vector<double>& g);

/// argmin over K0 of 1/2 z.Gamma z - y.z with Gamma = [[2,1],[1,2]].
std::array<double, 2> resolve_k0(const std::array<double, 2>& y, double N0);

/// Euclidean projection onto K0.
std::array<double, 2> project_k0(const std::array<double, 2>& z, double N0);

/// Fixed-point residual of the optimality system:
/// max( sup |beta - P+((p - q) S I / a1)|,
///      |(A0, I0) - resolve_k0((p(0)-q(0)+a0 N0, p(0)-d(0)+a0 N0) / a0)| ).
/// With a1 = 0 the first part is the complementarity sup |min(beta, -(p-q)SI)|;
/// with a0 = 0 the second part is |(A0,I0) - P_K0((A0,I0) - (gA0,gI0))|.
double optimality_residual_p0(const IdentCandidate& c, const Trajectory& traj, const AdjointTrajectory& adj,
                              const IdentWeights& w, double N0);

/// Initial guess: beta_I = beta_init, A0 = I0 = N0/4.
IdentCandidate default_candidate(const IdentProblem& prob, double beta_init);

/// Projected gradient with Armijo backtracking followed by projected
/// Newton-CG steps, with continuation in the weights. Throws
/// StallError<IdentResult> when no descent step can be found.
IdentResult solve_p0(const IdentProblem& prob, const IdentConfig& cfg);

IdentResult solve_p0(const IdentProblem& prob, const IdentConfig& cfg, const IdentCandidate& init);

} // namespace sailr

#endif // SAILR_IDENTIFICATION_HPP
