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
 * @file integrator.hpp
 * @brief Fixed-step classical RK4 on a uniform grid, forward and backward.
 *
 * State, tangent and adjoint paths all live on the same Grid so that
 * products of their samples can be integrated with the trapezoid rule
 * without interpolating between different discretizations.
 */

#ifndef SAILR_INTEGRATOR_HPP
#define SAILR_INTEGRATOR_HPP

#include "sailr/errors.hpp"
#include "sailr/model.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

namespace sailr {

/// Uniform grid t0 < t0+h < ... < T with M steps.
struct Grid {
    double t0     = 0.0;
    double T      = 1.0;
    std::size_t M = 1;

    Grid() = default;
    Grid(double t0_, double T_, std::size_t M_) : t0(t0_), T(T_), M(M_) { validate(); }

    double h() const noexcept { return (T - t0) / static_cast<double>(M); }
    std::size_t size() const noexcept { return M + 1; }

    /// Grid point k; the last point is T exactly.
    double time(std::size_t k) const noexcept { return k == M ? T : t0 + static_cast<double>(k) * h(); }

    void validate() const
    {
        if (M < 1 || !std::isfinite(t0) || !std::isfinite(T) || !(T > t0)) {
            throw DomainError("grid requires M >= 1 and T > t0");
        }
    }

    bool operator==(const Grid&) const = default;
};

/// Samples of a vector-valued function of time on a Grid. The Tag only
/// distinguishes states, tangents and adjoints at the type level.
template <typename Tag, typename V = Vector5>
struct GridPath {
    Grid grid;
    std::vector<V> values;

    std::size_t size() const noexcept { return values.size(); }
    const V& operator[](std::size_t k) const { return values[k]; }
    V& operator[](std::size_t k) { return values[k]; }
    const V& front() const { return values.front(); }
    const V& back() const { return values.back(); }
};

struct StateTag;
struct TangentTag;
struct AdjointTag;

using Trajectory          = GridPath<StateTag>;
using TangentTrajectory   = GridPath<TangentTag>;
using AdjointTrajectory   = GridPath<AdjointTag>;

template <typename V>
bool all_finite(const V& v)
{
    if constexpr (std::is_arithmetic_v<V>) {
        return std::isfinite(v);
    }
    else {
        return v.allFinite();
    }
}

/// One classical RK4 step of size dt from (t, x); dt may be negative.
template <typename V, typename Field>
V rk4_step(const Field& f, double t, const V& x, double dt)
{
    const V k1 = f(t, x);
    const V k2 = f(t + 0.5 * dt, V(x + (0.5 * dt) * k1));
    const V k3 = f(t + 0.5 * dt, V(x + (0.5 * dt) * k2));
    const V k4 = f(t + dt, V(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates x' = f(t, x) from x(t0) = x0 over the grid. The first sample
/// is x0 exactly. Throws IntegrationError on a non-finite value.
template <typename V, typename Field>
std::vector<V> integrate_forward(const Field& f, const V& x0, const Grid& g)
{
    g.validate();
    if (!all_finite(x0)) {
        throw IntegrationError("non-finite initial value", 0);
    }
    std::vector<V> out;
    out.reserve(g.size());
    out.push_back(x0);
    for (std::size_t k = 0; k < g.M; ++k) {
        const double t  = g.time(k);
        const double dt = g.time(k + 1) - t;
        V next          = rk4_step(f, t, out.back(), dt);
        if (!all_finite(next)) {
            throw IntegrationError("integration blow-up: non-finite state", k + 1);
        }
        out.push_back(std::move(next));
    }
    return out;
}

/// Integrates x' = f(t, x) backward from x(T) = xT, i.e. forward RK4 in the
/// reversed time s = T - t. The result is indexed on the increasing grid and
/// its last sample is xT exactly.
template <typename V, typename Field>
std::vector<V> integrate_backward(const Field& f, const V& xT, const Grid& g)
{
    g.validate();
    if (!all_finite(xT)) {
        throw IntegrationError("non-finite final value", g.M);
    }
    std::vector<V> out(g.size(), xT);
    for (std::size_t k = g.M; k > 0; --k) {
        const double t  = g.time(k);
        const double dt = g.time(k - 1) - t;
        V prev          = rk4_step(f, t, out[k], dt);
        if (!all_finite(prev)) {
            throw IntegrationError("integration blow-up: non-finite backward value", k - 1);
        }
        out[k - 1] = std::move(prev);
    }
    return out;
}

/// Linear interpolation of grid samples at time t; exact at grid points.
template <typename V>
V sample(const Grid& g, const std::vector<V>& values, double t)
{
    if (values.size() != g.size()) {
        throw DomainError("sample: value count does not match grid");
    }
    if (!(t >= g.t0 && t <= g.T)) {
        std::ostringstream os;
        os << "sample: time " << t << " outside [" << g.t0 << ", " << g.T << "]";
        throw DomainError(os.str());
    }
    const double pos = (t - g.t0) / g.h();
    auto k           = static_cast<std::size_t>(std::floor(pos));
    if (k >= g.M) {
        k = g.M - 1;
    }
    const double tk  = g.time(k);
    const double tk1 = g.time(k + 1);
    if (t == tk) {
        return values[k];
    }
    if (t == tk1) {
        return values[k + 1];
    }
    const double w = (t - tk) / (tk1 - tk);
    return (1.0 - w) * values[k] + w * values[k + 1];
}

template <typename Tag, typename V>
V sample(const GridPath<Tag, V>& path, double t)
{
    return sample(path.grid, path.values, t);
}

/// Composite trapezoid rule of the grid function k -> value(k).
template <typename Fn>
double trapezoid(const Grid& g, Fn&& value)
{
    double sum = 0.5 * (value(std::size_t{0}) + value(g.M));
    for (std::size_t k = 1; k < g.M; ++k) {
        sum += value(k);
    }
    return sum * g.h();
}

/// Trapezoid weights, so that trapezoid(g, f) == sum_k w[k] * f(k).
std::vector<double> trapezoid_weights(const Grid& g);

/// Forward solve of the SAILR system under params.
Trajectory simulate(const ModelParams& params, const Vector5& x0, const Grid& grid);

} // namespace sailr

#endif // SAILR_INTEGRATOR_HPP
