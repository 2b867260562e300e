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
 * @file control.hpp
 * @brief Isolation rates (l_A, l_I) in [0,1]^2 minimizing
 *
 *     J = a0/2 int (A^2 + I^2) + a1/2 (l_A^2 + l_I^2)
 *
 * subject to L(t) <= Lhat, through the penalized problems
 *
 *     J_eps = J + a2/(2 eps) int ((L - Lhat)^+)^2 + 1/2 |l - l*|^2
 *
 * and continuation eps -> 0. The anchor l* is the previous stage's solution.
 */

#ifndef SAILR_CONTROL_HPP
#define SAILR_CONTROL_HPP

#include "sailr/errors.hpp"
#include "sailr/integrator.hpp"
#include "sailr/model.hpp"
#include "sailr/sensitivity.hpp"

#include <array>
#include <string>
#include <vector>

namespace sailr {

struct ControlPair {
    double lA = 0.0;
    double lI = 0.0;

    bool operator==(const ControlPair&) const = default;
};

std::vector<std::string> check_controls(const ControlPair& c);

/// eps_k = 0.1 * 2^-k, k = 0..12.
std::vector<double> default_eps_schedule();

struct PenaltyConfig {
    std::vector<double> eps_schedule = default_eps_schedule();
    double alpha0 = 1.0;
    double alpha1 = 1e-2;
    double alpha2 = 1.0;
    double Lhat   = 1.0;
    ControlPair anchor;
};

/// Also requires Lhat > L0 and a1 > 0.
std::vector<std::string> check_penalty_config(const PenaltyConfig& pcfg, double L0);

struct ControlSolverConfig {
    double theta       = 0.5;   ///< relaxation of the fixed-point sweep
    double tol_fp      = 1e-10; ///< control change ending a stage
    int max_iters      = 500;   ///< sweeps per stage
    int max_backtracks = 50;
    /// Consecutive cost increases switching a stage to projected gradient.
    int oscillation_window = 3;
    /// Fixed-point residual accepted when the line search can no longer
    /// resolve a decrease.
    double stall_fp_tol  = 1e-6;
    double violation_tol   = 1e-4;
    double residual_tol    = 1e-3;
    /// Projected Newton refinement of the anchor-free final stage.
    int refine_iters  = 50;
    double refine_tol = 1e-9;
};

/// Work counters of a solve; deterministic for a given input.
struct SolveCounters {
    long forward_solves = 0;
    long adjoint_solves = 0;
    long iterations     = 0;
};

struct StageResult {
    double eps = 0.0;
    ControlPair controls;
    ControlPair anchor;
    Trajectory trajectory;
    AdjointTrajectory adjoint;
    double cost_eps    = 0.0;
    double fp_residual = 0.0; ///< max |l - update_controls_eps(l)|
    std::vector<double> cost_history;
    int iterations         = 0;
    bool gradient_fallback = false;
    bool converged         = false;
    SolveCounters counters;
};

struct StageRecord {
    double eps = 0.0;
    ControlPair controls;
    double cost_eps             = 0.0;
    double violation            = 0.0;
    double penalty_integral     = 0.0; ///< int ((L - Lhat)^+)^2
    double fp_residual          = 0.0;
    int iterations              = 0;
    bool gradient_fallback      = false;
    bool converged              = false;
};

struct ControlResult {
    ControlPair controls;
    Trajectory trajectory;
    AdjointTrajectory adjoint;
    double cost                 = 0.0; ///< J at the controls
    double constraint_violation = 0.0;
    double limit_residual       = 0.0; ///< max |l - P((1/a1) int A(q - e))|
    std::vector<double> multiplier_diag;
    std::vector<StageRecord> per_eps_history;
    /// Cost J_eps of every sweep, all stages in order.
    std::vector<double> cost_history;
    std::vector<std::string> warnings;
    int refine_steps = 0;
    bool converged   = false;
    std::string status;
    SolveCounters counters;
};

double cost_p(const ControlPair& ctrl, const ModelParams& params, const Vector5& x0, const Grid& grid, double alpha0,
              double alpha1);

/// J evaluated on the trajectory of ctrl.
double cost_p(const ControlPair& ctrl, const Trajectory& traj, double alpha0, double alpha1);

double cost_p_eps(const ControlPair& ctrl, const ModelParams& params, const Vector5& x0, const Grid& grid,
                  const PenaltyConfig& pcfg, double eps);

double cost_p_eps(const ControlPair& ctrl, const Trajectory& traj, const PenaltyConfig& pcfg, double eps);

/// int ((L - Lhat)^+)^2 by the trapezoid rule.
double penalty_integral(const Trajectory& traj, double Lhat);

/// (g_A, g_I) = (int A(e - q) + (a1 + 1) l_A - l_A*, int I(e - d) + (a1 + 1) l_I - l_I*).
std::array<double, 2> gradient_p_eps(const ControlPair& ctrl, const Trajectory& traj, const AdjointTrajectory& adj,
                                     double alpha1, const ControlPair& anchor);

/// P[0,1]((int A(q - e) + l_A*) / (a1 + 1)) and likewise for l_I.
ControlPair update_controls_eps(const Trajectory& traj, const AdjointTrajectory& adj, double alpha1,
                                const ControlPair& anchor);

/// P[0,1]((1/a1) int A(q - e)), P[0,1]((1/a1) int I(q - d)).
ControlPair limit_update(const Trajectory& traj, const AdjointTrajectory& adj, double alpha1);

double limit_residual(const ControlPair& ctrl, const Trajectory& traj, const AdjointTrajectory& adj, double alpha1);

/// max (L - Lhat)^+ over the grid. Throws DomainError if L < -tol_neg.
double constraint_violation(const Trajectory& traj, double Lhat);

/// nu_eps = (a2/eps)(L - Lhat)^+ on the grid.
std::vector<double> multiplier_diagnostic(const Trajectory& traj, double alpha2, double eps, double Lhat);

PenaltyTerms penalty_terms(const PenaltyConfig& pcfg, double eps);

/// Damped fixed-point sweeps with a projected-gradient fallback. Throws
/// StallError<StageResult> when max_iters is reached or the line search
/// fails.
StageResult solve_p_eps(const PenaltyConfig& pcfg, double eps, const ModelParams& params, const Vector5& x0,
                        const Grid& grid, const ControlPair& init, const ControlSolverConfig& cfg = {});

/// Continuation over pcfg.eps_schedule starting from pcfg.anchor, each
/// stage anchored at the previous solution, then a projected Newton
/// refinement of the anchor-free problem at the last eps.
ControlResult solve_p(const PenaltyConfig& pcfg, const ModelParams& params, const Vector5& x0, const Grid& grid,
                      const ControlSolverConfig& cfg = {});

struct MultistartResult {
    std::vector<ControlPair> starts;
    std::vector<ControlResult> runs;
    std::size_t best = 0;        ///< lowest cost among converged runs (all runs if none)
    double disagreement = 0.0;   ///< max distance between converged controls
};

/// solve_p from the four corners of [0,1]^2 and the center, on up to
/// `jobs` threads. The result does not depend on `jobs`.
MultistartResult solve_p_multistart(const PenaltyConfig& pcfg, const ModelParams& params, const Vector5& x0,
                                    const Grid& grid, const ControlSolverConfig& cfg = {}, unsigned jobs = 1);

} // namespace sailr

#endif // SAILR_CONTROL_HPP
