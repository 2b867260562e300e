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
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace sailr {
namespace {

struct Case {
    ModelParams params;
    Vector5 x0;
    Grid grid{0.0, 10.0, 10000};
    Trajectory traj;
};

Case setup(std::uint64_t seed)
{
    testing::Draw draw(seed);
    Case s;
    s.params     = draw.params(10.0);
    s.params.l_A = draw.uniform(0.1, 0.9);
    s.params.l_I = draw.uniform(0.1, 0.9);
    s.x0         = draw.state();
    s.traj       = simulate(s.params, s.x0, s.grid);
    return s;
}

TEST(Jacobian, TransposeIsAdjoint)
{
    testing::Draw draw(21);
    for (int k = 0; k < 50; ++k) {
        const ModelParams p = draw.params(1.0);
        const Vector5 X     = draw.state();
        const Vector5 x     = Vector5::Random();
        const Vector5 y     = Vector5::Random();
        const double t      = draw.uniform(0.0, 1.0);
        EXPECT_NEAR(y.dot(jacobian_apply(p, t, X, x)), jacobian_transpose_apply(p, t, X, y).dot(x), 1e-14);
    }
}

TEST(TangentP, ZeroDirection)
{
    const Case s = setup(1);
    const auto tan = tangent_p(s.traj, s.params, 0.0, 0.0);
    for (const auto& v : tan.values) {
        EXPECT_EQ(v, Vector5::Zero());
    }
}

TEST(TangentP, OneSidedDifferenceIsFirstOrder)
{
    const Case s    = setup(2);
    const double lam = 1e-5;
    const double wA = 0.7, wI = -0.4;
    const auto tan  = tangent_p(s.traj, s.params, wA, wI);
    const auto pert = simulate(s.params.with_controls(s.params.l_A + lam * wA, s.params.l_I + lam * wI), s.x0, s.grid);
    double err   = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < tan.size(); ++k) {
        err   = std::max(err, ((pert[k] - s.traj[k]) / lam - tan[k]).cwiseAbs().maxCoeff());
        scale = std::max(scale, tan[k].cwiseAbs().maxCoeff());
    }
    EXPECT_LE(err, 1e-3 * scale);
}

TEST(TangentP, FinalIsolatedComponentMatchesDerivative)
{
    const Case s    = setup(3);
    const double lam = 1e-5;
    const double wA = -0.3, wI = 0.9;
    const auto tan  = tangent_p(s.traj, s.params, wA, wI);
    auto LT         = [&](double z) {
        return simulate(s.params.with_controls(s.params.l_A + z * wA, s.params.l_I + z * wI), s.x0, s.grid)
            .back()[comp::L];
    };
    const double fd = (LT(lam) - LT(-lam)) / (2.0 * lam);
    EXPECT_NEAR(tan.back()[comp::L], fd, 1e-5 * std::abs(fd));
}

TEST(TangentP0, ZeroDirection)
{
    const Case s  = setup(4);
    const auto tan = tangent_p0(s.traj, s.params, PiecewiseLinear(0.0), 0.0, 0.0);
    for (const auto& v : tan.values) {
        EXPECT_EQ(v, Vector5::Zero());
    }
}

TEST(TangentP0, InitialValue)
{
    const Case s  = setup(5);
    const auto tan = tangent_p0(s.traj, s.params, PiecewiseLinear(0.0), 1.0, 0.0);
    EXPECT_EQ(tan.front(), make_state(-1.0, 1.0, 0.0, 0.0, 0.0));
}

TEST(TangentP0, MatchesCentralDifferences)
{
    const Case s = setup(6);
    const std::vector<double> knots{0.0, 5.0, 10.0};
    const PiecewiseLinear u(knots, {0.3, -0.5, 0.2});
    const double w = 0.4, v = -0.2, lam = 1e-5;
    auto perturbed = [&](double z) {
        ModelParams p = s.params;
        std::vector<double> b;
        for (double t : knots) {
            b.push_back(0.6 + z * u(t));
        }
        p.beta_I   = CoefficientTable(knots, b);
        Vector5 x0 = s.x0;
        x0[comp::S] -= z * (w + v);
        x0[comp::A] += z * w;
        x0[comp::I] += z * v;
        return std::pair{p, simulate(p, x0, s.grid)};
    };
    const auto [p0, base] = perturbed(0.0);
    const auto tan        = tangent_p0(base, p0, u, w, v);
    const auto plus       = perturbed(lam).second;
    const auto minus      = perturbed(-lam).second;
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < tan.size(); ++k) {
        err   = std::max(err, ((plus[k] - minus[k]) / (2.0 * lam) - tan[k]).cwiseAbs().maxCoeff());
        scale = std::max(scale, tan[k].cwiseAbs().maxCoeff());
    }
    EXPECT_LE(err, 1e-5 * scale);
}

TEST(AdjointPEps, VanishesWithoutSources)
{
    const Case s = setup(7);
    const auto adj = adjoint_p_eps(s.traj, s.params, PenaltyTerms{0.0, 1.0, 0.01, 10.0});
    for (const auto& y : adj.values) {
        EXPECT_EQ(y, Vector5::Zero());
    }
}

TEST(AdjointPEps, IsolatedEquationDecouplesFromInactivePenalty)
{
    const Case s   = setup(8);
    const auto adj  = adjoint_p_eps(s.traj, s.params, PenaltyTerms{1.0, 1.0, 0.01, 10.0});
    const Grid& g   = s.grid;
    const double mu = s.params.mu_L;
    double worst    = 0.0;
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        const double de = (adj[k + 1][dual::e] - adj[k - 1][dual::e]) / (2.0 * g.h());
        worst = std::max(worst, std::abs(de - (mu * adj[k][dual::e] - mu * adj[k][dual::f])));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(AdjointP0, VanishesWithMatchingData)
{
    const Case s = setup(9);
    const Observations obs{s.x0[comp::L], s.x0[comp::R], s.traj.back()[comp::L], s.traj.back()[comp::R], 10.0};
    for (const auto& y : adjoint_p0(s.traj, s.params, obs).values) {
        EXPECT_EQ(y, Vector5::Zero());
    }
}

TEST(AdjointP0, FinalData)
{
    const Case s = setup(10);
    const Observations obs{s.x0[comp::L], s.x0[comp::R], 0.1, 0.2, 10.0};
    const auto adj = adjoint_p0(s.traj, s.params, obs);
    EXPECT_EQ(adj.back()[dual::e], s.traj.back()[comp::L] - 0.1);
    EXPECT_EQ(adj.back()[dual::f], s.traj.back()[comp::R] - 0.2);
    EXPECT_EQ(adj.back()[dual::p], 0.0);
}

TEST(Duality, ZeroDirectionGivesZeroResidual)
{
    const Case s = setup(11);
    const PenaltyTerms pen{1.0, 1.0, 0.01, s.x0[comp::L] + 0.01};
    const auto adj = adjoint_p_eps(s.traj, s.params, pen);
    EXPECT_EQ(duality_residual_p(s.traj, adj, tangent_p(s.traj, s.params, 0.0, 0.0), 0.0, 0.0, pen), 0.0);
    const Observations obs{s.x0[comp::L], s.x0[comp::R], 0.1, 0.2, 10.0};
    const PiecewiseLinear zero(0.0);
    EXPECT_EQ(duality_residual_p0(s.traj, adjoint_p0(s.traj, s.params, obs),
                                  tangent_p0(s.traj, s.params, zero, 0.0, 0.0), zero, 0.0, 0.0, obs),
              0.0);
}

TEST(Duality, SecondOrderResiduals)
{
    testing::Draw draw(12);
    const ModelParams p = draw.params(10.0);
    const Vector5 x0    = draw.state();
    const PenaltyTerms pen{1.0, 1.0, 0.01, x0[comp::L] + 0.01};
    const Observations obs{x0[comp::L], x0[comp::R], 0.1, 0.3, 10.0};
    const PiecewiseLinear u({0.0, 10.0}, {0.5, -0.5});
    double prev_p = 0.0;
    for (std::size_t M : {10000, 20000}) {
        const Grid g(0.0, 10.0, M);
        const Trajectory tr = simulate(p, x0, g);
        const double rp = duality_residual_p(tr, adjoint_p_eps(tr, p, pen), tangent_p(tr, p, 0.5, -0.3), 0.5, -0.3, pen);
        const double rp0 =
            duality_residual_p0(tr, adjoint_p0(tr, p, obs), tangent_p0(tr, p, u, 0.2, 0.1), u, 0.2, 0.1, obs);
        EXPECT_LE(rp, 1e-6);
        EXPECT_LE(rp0, 1e-6);
        if (prev_p > 0.0) {
            EXPECT_NEAR(prev_p / rp, 4.0, 1.0);
        }
        prev_p = rp;
    }
}

TEST(Duality, GridMismatchThrows)
{
    const Case s = setup(13);
    const Trajectory other = simulate(s.params, s.x0, Grid(0.0, 10.0, 100));
    const PenaltyTerms pen{1.0, 1.0, 0.01, 1.0};
    EXPECT_THROW(duality_residual_p(s.traj, adjoint_p_eps(other, s.params, pen), tangent_p(s.traj, s.params, 1, 1), 1,
                                    1, pen),
                 DomainError);
}

} // namespace
} // namespace sailr
