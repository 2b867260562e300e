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

#include "sailr/stability.hpp"

#include "sailr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sailr {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_constant(const CoefficientTable& c, const char* name)
{
    if (!c.is_constant()) {
        throw DomainError(std::string(name) +
                          " is time-varying; pass its average over (0, T) (see averaged_params)");
    }
}

double transmission(const ModelParams& p)
{
    require_constant(p.beta_I, "beta_I");
    require_constant(p.beta_A, "beta_A");
    return p.k2() * p.beta_A(0.0) + p.sigma * p.beta_I(0.0);
}

// Roots of x^2 + b x + c without cancellation.
std::array<std::complex<double>, 2> quadratic_roots(double b, double c)
{
    const double disc = b * b - 4.0 * c;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double q = -0.5 * (b + std::copysign(s, b));
        if (q == 0.0) {
            return {std::complex<double>(0.0), std::complex<double>(0.0)};
        }
        return {std::complex<double>(q), std::complex<double>(c / q)};
    }
    const double im = 0.5 * std::sqrt(-disc);
    return {std::complex<double>(-0.5 * b, im), std::complex<double>(-0.5 * b, -im)};
}

// Smallest t > 0 with f(t) = target for f increasing from below target.
template <typename F>
double increasing_root(const F& f, double target)
{
    double lo = 0.0;
    double hi = 1.0;
    while (f(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e300) {
            return inf;
        }
    }
    for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (f(mid) < target ? lo : hi) = mid;
    }
    // the bracket end with the smaller residual
    return std::abs(f(lo) - target) <= std::abs(f(hi) - target) ? lo : hi;
}

} // namespace

double r0(const ModelParams& params)
{
    return transmission(params) / (params.k1() * params.k2());
}

double s_threshold(const ModelParams& params)
{
    const double beta = transmission(params);
    return beta > 0.0 ? params.k1() * params.k2() / beta : inf;
}

ModelParams averaged_params(const ModelParams& params, double t0, double T)
{
    ModelParams p = params;
    p.beta_I      = CoefficientTable(params.beta_I.mean(t0, T));
    p.beta_A      = CoefficientTable(params.beta_A.mean(t0, T));
    p.xi          = CoefficientTable(params.xi.mean(t0, T));
    return p;
}

Eigen::Matrix3d infected_jacobian(double S_inf, const ModelParams& params)
{
    require_constant(params.beta_I, "beta_I");
    require_constant(params.beta_A, "beta_A");
    const double bA = params.beta_A(0.0);
    const double bI = params.beta_I(0.0);
    Eigen::Matrix3d J;
    J << bA * S_inf - params.k1(), bI * S_inf, 0.0,
         params.sigma, -params.k2(), 0.0,
         params.l_A, params.l_I, -params.mu_L;
    return J;
}

HurwitzResult hurwitz_check(double S_inf, const ModelParams& params)
{
    const double beta = transmission(params);
    const double b    = params.k1() + params.k2() - params.beta_A(0.0) * S_inf;
    const double c    = params.k1() * params.k2() - beta * S_inf;
    HurwitzResult out;
    out.hurwitz       = b > 0.0 && c > 0.0;
    out.marginal      = params.mu_L == 0.0;
    const auto q      = quadratic_roots(b, c);
    out.eigenvalues   = {q[0], q[1], std::complex<double>(-params.mu_L)};
    return out;
}

std::string to_string(Regime r)
{
    switch (r) {
    case Regime::subcritical:
        return "subcritical";
    case Regime::supercritical:
        return "supercritical";
    case Regime::critical:
        break;
    }
    return "critical";
}

StabilityReport simulate_extinction(const ModelParams& params, const Vector5& x0, const ExtinctionConfig& cfg)
{
    using namespace comp;
    validate_params(params);
    require_constant(params.xi, "xi");
    if (params.xi(0.0) != 0.0) {
        throw DomainError("simulate_extinction requires xi = 0");
    }
    if ((x0.array() < 0.0).any()) {
        throw DomainError("simulate_extinction requires a nonnegative initial state");
    }
    if (!(cfg.h > 0.0) || !(cfg.horizon > 0.0) || !(cfg.tol > 0.0)) {
        throw DomainError("simulate_extinction: h, horizon and tol must be > 0");
    }

    StabilityReport rep;
    rep.R0    = r0(params);
    rep.S_bar = s_threshold(params);

    auto field   = [&](double t, const Vector5& x) { return rhs(x, params, t); };
    auto extinct = [&](const Vector5& x) { return x[A] + x[I] + x[L] < cfg.tol; };

    Vector5 x      = x0;
    double t       = 0.0;
    double horizon = std::min(cfg.horizon, cfg.horizon_cap);
    while (true) {
        const auto n = static_cast<long>(std::ceil((horizon - t) / cfg.h - 1e-9));
        const double dt = (horizon - t) / static_cast<double>(std::max(n, 1L));
        for (long k = 0; k < n; ++k) {
            Vector5 next = rk4_step(field, t, x, dt);
            if (!next.allFinite()) {
                throw IntegrationError("integration blow-up: non-finite state", static_cast<std::size_t>(rep.steps));
            }
            if (next[S] > x[S] + tol_neg) {
                rep.S_monotone = false;
            }
            x = next;
            t = k + 1 == n ? horizon : t + dt;
            ++rep.steps;
        }
        if (extinct(x) || horizon >= cfg.horizon_cap) {
            break;
        }
        horizon = std::min(2.0 * horizon, cfg.horizon_cap);
    }

    rep.final_time         = t;
    rep.final_state        = x;
    rep.S_tilde_inf        = x[S];
    rep.extinction         = extinct(x);
    rep.below_threshold    = rep.S_tilde_inf < rep.S_bar;
    rep.conservation_error = std::abs(x[S] + x[R] - params.N);
    rep.at_limit           = hurwitz_check(rep.S_tilde_inf, params);
    const double m         = rep.R0 * rep.S_tilde_inf;
    if (std::abs(m - 1.0) < cfg.critical_band) {
        rep.regime = Regime::critical;
    }
    else {
        rep.regime = m < 1.0 ? Regime::subcritical : Regime::supercritical;
    }
    return rep;
}

std::vector<std::string> check_t_loc_inputs(const TLocInputs& in, double L0, double Lhat)
{
    std::vector<std::string> errs;
    for (const auto& [name, v] : {std::pair<const char*, double>{"F0", in.F0},
                                  {"F1", in.F1},
                                  {"F2", in.F2},
                                  {"G", in.G},
                                  {"alpha0", in.alpha0},
                                  {"mu_L", in.mu_L}}) {
        if (!std::isfinite(v) || v < 0.0) {
            errs.push_back(std::string(name) + " must be finite and >= 0");
        }
    }
    if (!(in.y1 > 0.0 && in.y1 < L0)) {
        errs.push_back("y1 must lie in (0, L0)");
    }
    if (!(in.rho > L0 - in.y1 && in.rho < Lhat - in.y1)) {
        errs.push_back("rho must lie in (L0 - y1, Lhat - y1)");
    }
    if (!(in.F0 < in.rho)) {
        errs.push_back("F0 must be < rho");
    }
    if (!(in.y1 + in.rho <= Lhat)) {
        errs.push_back("y1 + rho must be <= Lhat");
    }
    return errs;
}

TLocInputs make_t_loc_inputs(const ModelParams& params, const Trajectory& traj, double alpha0, double Lhat,
                             double y1, double rho, double C)
{
    using namespace comp;
    double supA = 0.0;
    double supI = 0.0;
    double supL = 0.0;
    for (const auto& x : traj.values) {
        supA = std::max(supA, std::abs(x[A]));
        supI = std::max(supI, std::abs(x[I]));
        supL = std::max(supL, std::abs(x[L]));
    }
    const double L0 = traj.front()[L];
    TLocInputs in;
    in.y1     = y1;
    in.rho    = rho;
    in.F0     = std::abs(L0 - y1);
    in.F1     = params.l_A * supA + params.l_I * supI + params.mu_L * supL + params.mu_L * y1;
    in.F2     = supA + supI;
    in.G      = C * (params.beta_A.sup_norm() + params.beta_I.sup_norm() + params.sigma + params.mu_A + params.l_A +
                params.mu_I + params.l_I + params.xi.sup_norm() + params.l_A * params.l_A + params.l_I * params.l_I);
    in.alpha0 = alpha0;
    in.mu_L   = params.mu_L;
    if (auto errs = check_t_loc_inputs(in, L0, Lhat); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    return in;
}

TLocInputs make_t_loc_inputs(const ModelParams& params, const Trajectory& traj, double alpha0, double Lhat, double C)
{
    const double L0 = traj.front()[comp::L];
    const double y1 = 0.5 * L0;
    return make_t_loc_inputs(params, traj, alpha0, Lhat, y1, 0.5 * ((L0 - y1) + (Lhat - y1)), C);
}

TLoc compute_t_loc(const TLocInputs& in)
{
    if (!(in.F0 < in.rho)) {
        throw ValidationError({"F0 must be < rho"});
    }
    TLoc out;
    auto growth = [&](double t) { return t * std::sqrt(t) * std::exp(in.G * t); };
    out.T1      = in.mu_L * in.alpha0 > 0.0
                      ? increasing_root([&](double t) { return 4.0 * in.mu_L * in.alpha0 * growth(t); }, 1.0)
                      : inf;
    const double a = 4.0 * in.alpha0 * (in.F1 + in.rho * in.mu_L);
    out.T2         = a > 0.0 ? increasing_root([&](double t) { return in.F0 + a * growth(t); }, in.rho) : inf;
    out.T_loc      = std::min(out.T1, out.T2);
    return out;
}

} // namespace sailr
