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
 * @file stability.hpp
 * @brief Reproduction number, susceptible threshold, linear stability of
 *        the infected subsystem (A, I, L) and long-horizon extinction runs.
 */

#ifndef SAILR_STABILITY_HPP
#define SAILR_STABILITY_HPP

#include "sailr/integrator.hpp"
#include "sailr/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>

namespace sailr {

/// (k2 bA + sigma bI) / (k1 k2). Throws DomainError for time-varying
/// transmission tables; average them first (averaged_params).
double r0(const ModelParams& params);

/// k1 k2 / beta with beta = k2 bA + sigma bI; +inf when beta = 0.
double s_threshold(const ModelParams& params);

/// Copy of params with beta_I, beta_A and xi replaced by their means over
/// [t0, T].
ModelParams averaged_params(const ModelParams& params, double t0, double T);

/// [[bA S - k1, bI S, 0], [sigma, -k2, 0], [lA, lI, -muL]].
Eigen::Matrix3d infected_jacobian(double S_inf, const ModelParams& params);

struct HurwitzResult {
    /// k1 + k2 - bA S > 0 and k1 k2 - beta S > 0.
    bool hurwitz = false;
    /// The -muL eigenvalue is zero (muL = 0).
    bool marginal = false;
    /// Roots of the quadratic first, then -muL.
    std::array<std::complex<double>, 3> eigenvalues;
};

HurwitzResult hurwitz_check(double S_inf, const ModelParams& params);

enum class Regime { subcritical, supercritical, critical };

std::string to_string(Regime r);

struct ExtinctionConfig {
    double horizon      = 100.0;
    double h            = 0.05;
    double tol          = 1e-8;         ///< on A + I + L
    double horizon_cap  = 1048576.0;    ///< 2^20
    double critical_band = 1e-3;        ///< |R0 S~ - 1| below this is critical
};

struct StabilityReport {
    double R0    = 0.0;
    double S_bar = 0.0;
    HurwitzResult at_limit; ///< hurwitz_check(S_tilde_inf)
    double S_tilde_inf = 0.0;
    bool extinction    = false; ///< A + I + L < tol at the final time
    bool below_threshold = false; ///< S_tilde_inf < S_bar
    bool S_monotone    = true;   ///< S nonincreasing within tol_neg per step
    double conservation_error = 0.0; ///< |S + R - N| at the final time
    Regime regime      = Regime::critical;
    double final_time  = 0.0;
    Vector5 final_state = Vector5::Zero();
    long steps         = 0;
};

/// Fixed-step RK4 run with constant coefficients and xi = 0, doubling the
/// horizon until A + I + L < tol or the cap is reached.
StabilityReport simulate_extinction(const ModelParams& params, const Vector5& x0, const ExtinctionConfig& cfg = {});

struct TLocInputs {
    double y1     = 0.0; ///< in (0, L0)
    double rho    = 0.0; ///< in (L0 - y1, Lhat - y1)
    double F0     = 0.0; ///< |L0 - y1|
    double F1     = 0.0; ///< lA |A| + lI |I| + muL |L| + muL y1 (sup norms)
    double F2     = 0.0; ///< |A| + |I|
    double G      = 0.0;
    double alpha0 = 0.0;
    double mu_L   = 0.0;
};

/// Empty when F0 < rho, y1 + rho <= Lhat and the scalars are finite and
/// nonnegative.
std::vector<std::string> check_t_loc_inputs(const TLocInputs& in, double L0, double Lhat);

/// Assembles the inputs from a trajectory of the controlled model:
/// G = C (|bA| + |bI| + sigma + muA + lA + muI + lI + |xi| + lA^2 + lI^2).
TLocInputs make_t_loc_inputs(const ModelParams& params, const Trajectory& traj, double alpha0, double Lhat,
                             double y1, double rho, double C = 1.0);

/// y1 = L0/2 and rho at the middle of (L0 - y1, Lhat - y1).
TLocInputs make_t_loc_inputs(const ModelParams& params, const Trajectory& traj, double alpha0, double Lhat,
                             double C = 1.0);

struct TLoc {
    double T1    = 0.0; ///< 4 muL a0 e^{Gt} t^{3/2} = 1, +inf if muL a0 = 0
    double T2    = 0.0; ///< F0 + 4 a0 (F1 + rho muL) t^{3/2} e^{Gt} = rho
    double T_loc = 0.0;
};

/// Roots by bracketing and bisection. Throws ValidationError unless
/// F0 < rho.
TLoc compute_t_loc(const TLocInputs& in);

} // namespace sailr

#endif // SAILR_STABILITY_HPP
