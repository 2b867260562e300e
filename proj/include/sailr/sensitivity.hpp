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
 * @file sensitivity.hpp
 * @brief Linearized (tangent) and backward dual (adjoint) systems.
 *
 * Both the control problem over (l_A, l_I) and the identification problem
 * over (beta_I, A0, I0) share the Jacobian of the SAILR field along a
 * stored trajectory. Between grid points the trajectory is linearly
 * interpolated, so every path here lives on the trajectory's grid.
 *
 * The dual systems are integrated exactly in the form
 *
 *     p' = k0 p - k0 q
 *     q' = bA S p - k3 q - sigma d - lA e - muA f - a0 A
 *     d' = bI S p - bI S q + k2 d - lI e - muI f - a0 I
 *     e' = muL e - muL f - (a2/eps) (L - Lhat)^+
 *     f' = -xi p + xi f
 *
 * with k0 = bA A + bI I, k3 = bA S - k1, k2 = muI + lI. For the
 * identification problem the sources vanish and the final data carries the
 * terminal mismatch in (e, f).
 */

#ifndef SAILR_SENSITIVITY_HPP
#define SAILR_SENSITIVITY_HPP

#include "sailr/integrator.hpp"
#include "sailr/model.hpp"

#include <vector>

namespace sailr {

/// Grid samples of the frozen coefficients of the linearized systems.
struct FrozenCoeffs {
    std::vector<double> k0; ///< bA A + bI I
    std::vector<double> k2; ///< muI + lI
    std::vector<double> k3; ///< bA S - k1
};

FrozenCoeffs frozen_coeffs(const Trajectory& traj, const ModelParams& params);

/// Jacobian of the SAILR field at state X applied to x.
Vector5 jacobian_apply(const ModelParams& params, double t, const Vector5& X, const Vector5& x);

/// Transposed Jacobian at state X applied to a dual vector y.
Vector5 jacobian_transpose_apply(const ModelParams& params, double t, const Vector5& X, const Vector5& y);

/// Penalty data of the epsilon-problem dual system.
struct PenaltyTerms {
    double alpha0 = 0.0;
    double alpha2 = 0.0;
    double eps    = 1.0;
    double Lhat   = 1.0;
};

/// Tangent of the state with respect to (l_A, l_I) in direction
/// (omega_A, omega_I). `params` carries the controls of `traj`.
TangentTrajectory tangent_p(const Trajectory& traj, const ModelParams& params, double omega_A, double omega_I);

/// Tangent of the state with respect to (beta_I, A0, I0) in direction
/// (u, w, v). `params.beta_I` is the current beta_I of `traj`.
TangentTrajectory tangent_p0(const Trajectory& traj, const ModelParams& params, const PiecewiseLinear& u,
                             double w, double v);

/// Dual system of the penalized control problem, zero final data.
AdjointTrajectory adjoint_p_eps(const Trajectory& traj, const ModelParams& params, const PenaltyTerms& pen);

/// Dual system of the identification problem; final data
/// (0, 0, 0, L(T) - LT, R(T) - RT).
AdjointTrajectory adjoint_p0(const Trajectory& traj, const ModelParams& params, const Observations& obs);

/// Homogeneous dual system of the identification problem from arbitrary
/// final data.
AdjointTrajectory adjoint_p0_from(const Trajectory& traj, const ModelParams& params, const Vector5& final_data);

/// |LHS - RHS| of the integration-by-parts identity of the control problem:
///   a0 int(A a + I i) + (a2/eps) int (L - Lhat)^+ l
///     = int( wA A (e - q) + wI I (e - d) ).
double duality_residual_p(const Trajectory& traj, const AdjointTrajectory& adjoint, const TangentTrajectory& tangent,
                          double omega_A, double omega_I, const PenaltyTerms& pen);

/// |LHS - RHS| of the identification identity:
///   (L(T) - LT) l(T) + (R(T) - RT) r(T)
///     = int S I (q - p) u + p(0)(-w - v) + q(0) w + d(0) v.
double duality_residual_p0(const Trajectory& traj, const AdjointTrajectory& adjoint,
                           const TangentTrajectory& tangent, const PiecewiseLinear& u, double w, double v,
                           const Observations& obs);

} // namespace sailr

#endif // SAILR_SENSITIVITY_HPP
