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

#include "sailr/sensitivity.hpp"

#include "sailr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sailr {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b)) {
        throw DomainError(std::string(what) + ": grid mismatch");
    }
}

void require_trajectory(const Trajectory& traj)
{
    traj.grid.validate();
    if (traj.size() != traj.grid.size()) {
        throw DomainError("trajectory sample count does not match its grid");
    }
}

double positive_part(double z) { return z > 0.0 ? z : 0.0; }

// Time in (t_a, t_b) where the linear interpolant of L crosses Lhat, or NaN.
double crossing(const Trajectory& traj, std::size_t k, double Lhat)
{
    const double za = traj[k - 1][comp::L] - Lhat;
    const double zb = traj[k][comp::L] - Lhat;
    if (!((za < 0.0 && zb > 0.0) || (za > 0.0 && zb < 0.0))) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double ta = traj.grid.time(k - 1);
    const double tb = traj.grid.time(k);
    const double tc = ta + (tb - ta) * za / (za - zb);
    return tc > ta && tc < tb ? tc : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

FrozenCoeffs frozen_coeffs(const Trajectory& traj, const ModelParams& params)
{
    using namespace comp;
    FrozenCoeffs fc;
    fc.k0.reserve(traj.size());
    fc.k2.assign(traj.size(), params.k2());
    fc.k3.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t   = traj.grid.time(k);
        const Vector5& X = traj[k];
        fc.k0.push_back(params.beta_A(t) * X[A] + params.beta_I(t) * X[I]);
        fc.k3.push_back(params.beta_A(t) * X[S] - params.k1());
    }
    return fc;
}

Vector5 jacobian_apply(const ModelParams& params, double t, const Vector5& X, const Vector5& x)
{
    using namespace comp;
    const double bI = params.beta_I(t);
    const double bA = params.beta_A(t);
    const double xi = params.xi(t);
    const double k0 = bA * X[A] + bI * X[I];
    const double k3 = bA * X[S] - params.k1();
    const double k2 = params.k2();

    Vector5 y;
    y[S] = -k0 * x[S] - bI * X[S] * x[I] - bA * X[S] * x[A] + xi * x[R];
    y[A] = k0 * x[S] + bI * X[S] * x[I] + k3 * x[A];
    y[I] = params.sigma * x[A] - k2 * x[I];
    y[L] = params.l_A * x[A] + params.l_I * x[I] - params.mu_L * x[L];
    y[R] = params.mu_A * x[A] + params.mu_I * x[I] + params.mu_L * x[L] - xi * x[R];
    return y;
}

Vector5 jacobian_transpose_apply(const ModelParams& params, double t, const Vector5& X, const Vector5& y)
{
    using namespace dual;
    const double bI = params.beta_I(t);
    const double bA = params.beta_A(t);
    const double xi = params.xi(t);
    const double S  = X[comp::S];
    const double k0 = bA * X[comp::A] + bI * X[comp::I];
    const double k3 = bA * S - params.k1();
    const double k2 = params.k2();

    Vector5 z;
    z[p] = -k0 * y[p] + k0 * y[q];
    z[q] = -bA * S * y[p] + k3 * y[q] + params.sigma * y[d] + params.l_A * y[e] + params.mu_A * y[f];
    z[d] = -bI * S * y[p] + bI * S * y[q] - k2 * y[d] + params.l_I * y[e] + params.mu_I * y[f];
    z[e] = -params.mu_L * y[e] + params.mu_L * y[f];
    z[f] = xi * y[p] - xi * y[f];
    return z;
}

TangentTrajectory tangent_p(const Trajectory& traj, const ModelParams& params, double omega_A, double omega_I)
{
    using namespace comp;
    require_trajectory(traj);
    auto field = [&](double t, const Vector5& x) {
        const Vector5 X = sample(traj, t);
        Vector5 dx      = jacobian_apply(params, t, X, x);
        dx[A] -= omega_A * X[A];
        dx[I] -= omega_I * X[I];
        dx[L] += omega_A * X[A] + omega_I * X[I];
        return dx;
    };
    return TangentTrajectory{traj.grid, integrate_forward(field, Vector5(Vector5::Zero()), traj.grid)};
}

TangentTrajectory tangent_p0(const Trajectory& traj, const ModelParams& params, const PiecewiseLinear& u,
                             double w, double v)
{
    using namespace comp;
    require_trajectory(traj);
    if (!u.covers(traj.grid.t0, traj.grid.T)) {
        throw DomainError("tangent_p0: direction table does not cover the grid");
    }
    auto field = [&](double t, const Vector5& x) {
        const Vector5 X     = sample(traj, t);
        Vector5 dx          = jacobian_apply(params, t, X, x);
        const double source = u(t) * X[S] * X[I];
        dx[S] -= source;
        dx[A] += source;
        return dx;
    };
    return TangentTrajectory{traj.grid, integrate_forward(field, make_state(-w - v, w, v, 0.0, 0.0), traj.grid)};
}

AdjointTrajectory adjoint_p_eps(const Trajectory& traj, const ModelParams& params, const PenaltyTerms& pen)
{
    require_trajectory(traj);
    if (!(pen.eps > 0.0)) {
        throw DomainError("adjoint_p_eps: eps must be > 0");
    }
    const double weight = pen.alpha2 / pen.eps;
    auto field          = [&](double t, const Vector5& y) {
        const Vector5 X = sample(traj, t);
        Vector5 dy      = -jacobian_transpose_apply(params, t, X, y);
        dy[dual::q] -= pen.alpha0 * X[comp::A];
        dy[dual::d] -= pen.alpha0 * X[comp::I];
        dy[dual::e] -= weight * positive_part(X[comp::L] - pen.Lhat);
        return dy;
    };
    // RK4 backward, with steps split where L crosses Lhat so that the
    // penalty source is smooth on every substep.
    const Grid& g = traj.grid;
    std::vector<Vector5> out(g.size(), Vector5::Zero());
    for (std::size_t k = g.M; k > 0; --k) {
        const double tb = g.time(k);
        const double ta = g.time(k - 1);
        const double tc = crossing(traj, k, pen.Lhat);
        Vector5 y       = out[k];
        if (std::isnan(tc)) {
            y = rk4_step(field, tb, y, ta - tb);
        }
        else {
            y = rk4_step(field, tb, y, tc - tb);
            y = rk4_step(field, tc, y, ta - tc);
        }
        if (!y.allFinite()) {
            throw IntegrationError("integration blow-up: non-finite backward value", k - 1);
        }
        out[k - 1] = y;
    }
    return AdjointTrajectory{g, std::move(out)};
}

AdjointTrajectory adjoint_p0_from(const Trajectory& traj, const ModelParams& params, const Vector5& final_data)
{
    require_trajectory(traj);
    auto field = [&](double t, const Vector5& y) {
        return Vector5(-jacobian_transpose_apply(params, t, sample(traj, t), y));
    };
    return AdjointTrajectory{traj.grid, integrate_backward(field, final_data, traj.grid)};
}

AdjointTrajectory adjoint_p0(const Trajectory& traj, const ModelParams& params, const Observations& obs)
{
    require_trajectory(traj);
    const Vector5& XT = traj.back();
    return adjoint_p0_from(traj, params, make_state(0.0, 0.0, 0.0, XT[comp::L] - obs.LT, XT[comp::R] - obs.RT));
}

double duality_residual_p(const Trajectory& traj, const AdjointTrajectory& adjoint, const TangentTrajectory& tangent,
                          double omega_A, double omega_I, const PenaltyTerms& pen)
{
    using namespace comp;
    require_same_grid(traj.grid, adjoint.grid, "duality_residual_p");
    require_same_grid(traj.grid, tangent.grid, "duality_residual_p");
    const Grid& g = traj.grid;

    const double state_part = trapezoid(g, [&](std::size_t k) {
        return traj[k][A] * tangent[k][A] + traj[k][I] * tangent[k][I];
    });
    // trapezoid rule, split at crossings of Lhat
    double penalty_part = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) {
        const double ta = g.time(k - 1);
        const double tb = g.time(k);
        const double fa = positive_part(traj[k - 1][L] - pen.Lhat) * tangent[k - 1][L];
        const double fb = positive_part(traj[k][L] - pen.Lhat) * tangent[k][L];
        const double tc = crossing(traj, k, pen.Lhat);
        if (std::isnan(tc)) {
            penalty_part += 0.5 * (tb - ta) * (fa + fb);
        }
        else {
            // the integrand vanishes at tc
            penalty_part += 0.5 * ((tc - ta) * fa + (tb - tc) * fb);
        }
    }
    const double lhs = pen.alpha0 * state_part + (pen.alpha2 / pen.eps) * penalty_part;

    const double rhs = trapezoid(g, [&](std::size_t k) {
        const Vector5& y = adjoint[k];
        return omega_A * traj[k][A] * (y[dual::e] - y[dual::q]) + omega_I * traj[k][I] * (y[dual::e] - y[dual::d]);
    });
    return std::abs(lhs - rhs);
}

double duality_residual_p0(const Trajectory& traj, const AdjointTrajectory& adjoint,
                           const TangentTrajectory& tangent, const PiecewiseLinear& u, double w, double v,
                           const Observations& obs)
{
    using namespace comp;
    require_same_grid(traj.grid, adjoint.grid, "duality_residual_p0");
    require_same_grid(traj.grid, tangent.grid, "duality_residual_p0");
    const Grid& g = traj.grid;

    const double lhs = (traj.back()[L] - obs.LT) * tangent.back()[L] + (traj.back()[R] - obs.RT) * tangent.back()[R];

    const double integral = trapezoid(g, [&](std::size_t k) {
        const Vector5& y = adjoint[k];
        return traj[k][S] * traj[k][I] * (y[dual::q] - y[dual::p]) * u(g.time(k));
    });
    const Vector5& y0 = adjoint.front();
    const double rhs  = integral + y0[dual::p] * (-w - v) + y0[dual::q] * w + y0[dual::d] * v;
    return std::abs(lhs - rhs);
}

} // namespace sailr
