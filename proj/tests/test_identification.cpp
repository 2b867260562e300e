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

#include "sailr/identification.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace sailr {
namespace {

ModelParams base_params()
{
    ModelParams p;
    p.sigma  = 0.2;
    p.mu_A   = 0.1;
    p.mu_I   = 0.1;
    p.mu_L   = 0.05;
    p.l_A    = 0.1;
    p.l_I    = 0.3;
    p.beta_A = CoefficientTable(0.3);
    return p;
}

struct Planted {
    IdentProblem prob;
    IdentCandidate truth;
};

Planted planted(double T, double beta, double A0, double I0, IdentWeights w, std::size_t M)
{
    const ModelParams p = base_params();
    const double L0 = 0.01, R0 = 0.02;
    IdentProblem scratch = make_ident_problem(p, Observations{L0, R0, 0.0, 0.0, T}, w, M);
    IdentCandidate c{CoefficientTable::on_uniform_grid(0.0, T, std::vector<double>(M + 1, beta)), A0, I0};
    const Trajectory tr = simulate(scratch.params_for(c), scratch.initial_state(c), scratch.grid);
    const Observations obs{L0, R0, tr.back()[comp::L], tr.back()[comp::R], T};
    return {make_ident_problem(p, obs, w, M), c};
}

TEST(CostP0, VanishesAtPlantedTruthWithoutRegularization)
{
    const Planted pl = planted(10.0, 0.4, 0.05, 0.03, IdentWeights{0.0, 0.0}, 2000);
    EXPECT_EQ(cost_p0(pl.truth, pl.prob), 0.0);
}

TEST(CostP0, InfectionFreeCandidateHasClosedForm)
{
    ModelParams p         = base_params();
    const Observations ob{0.01, 0.02, 0.005, 0.03, 4.0};
    const IdentProblem pr = make_ident_problem(p, ob, IdentWeights{0.2, 0.0}, 1000);
    const IdentCandidate c{CoefficientTable(0.0), 0.0, 0.0};
    // A = I = 0 throughout: L decays at rate mu_L into R.
    const double LT = 0.01 * std::exp(-0.05 * 4.0);
    const double RT = 0.02 + 0.01 - LT;
    const double N0 = 1.0 - 0.03;
    const double expected =
        0.5 * ((LT - 0.005) * (LT - 0.005) + (RT - 0.03) * (RT - 0.03)) + 0.5 * 0.2 * N0 * N0;
    EXPECT_NEAR(cost_p0(c, pr), expected, 1e-12);
}

TEST(CostP0, RegularizationScalesQuadratically)
{
    const Planted pl = planted(5.0, 0.4, 0.05, 0.03, IdentWeights{0.0, 1.0}, 1000);
    IdentCandidate c = pl.truth;
    const double base = cost_p0(c, pl.prob);
    std::vector<double> doubled = c.beta_I.values();
    for (double& v : doubled) {
        v *= 2.0;
    }
    // beta contribution alone: 1/2 int beta^2 = 0.5 * 0.16 * 5
    EXPECT_NEAR(base, 0.4, 1e-12);
    const IdentCandidate c2{CoefficientTable::on_uniform_grid(0.0, 5.0, doubled), c.A0, c.I0};
    const Trajectory tr = simulate(pl.prob.params_for(pl.truth), pl.prob.initial_state(pl.truth), pl.prob.grid);
    EXPECT_NEAR(cost_p0(c2, pl.prob, tr), 4.0 * base, 1e-12);
}

TEST(GradientP0, ZeroAtUnregularizedTruth)
{
    const Planted pl = planted(5.0, 0.4, 0.05, 0.03, IdentWeights{0.0, 0.0}, 1000);
    const IdentGradient g = gradient_p0(pl.truth, pl.prob);
    EXPECT_EQ(g.A0, 0.0);
    EXPECT_EQ(g.I0, 0.0);
    for (double v : g.beta) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(GradientP0, InitialValueComponentsMatchFiniteDifferences)
{
    const Planted pl = planted(8.0, 0.5, 0.04, 0.02, IdentWeights{1e-3, 1e-3}, 4000);
    IdentProblem prob = pl.prob;
    prob.obs.LT += 0.01;
    prob.obs.RT -= 0.02;
    const IdentGradient g = gradient_p0(pl.truth, prob);
    const double lam      = 1e-6;
    auto shifted          = [&](double dA, double dI) {
        IdentCandidate c = pl.truth;
        c.A0 += dA;
        c.I0 += dI;
        return cost_p0(c, prob);
    };
    const double fA = (shifted(lam, 0.0) - shifted(-lam, 0.0)) / (2.0 * lam);
    const double fI = (shifted(0.0, lam) - shifted(0.0, -lam)) / (2.0 * lam);
    EXPECT_NEAR(g.A0, fA, 1e-4 * std::abs(fA));
    EXPECT_NEAR(g.I0, fI, 1e-4 * std::abs(fI));
}

TEST(ProjectKplus, ClampsNegativeEntries)
{
    EXPECT_EQ(project_kplus_grid({-1.0, 0.0, 2.0, -0.0}), (std::vector<double>{0.0, 0.0, 2.0, 0.0}));
}

TEST(ResolveK0, InteriorPoint)
{
    const double N0 = 0.8;
    // y = Gamma z with Gamma = [[2, 1], [1, 2]]
    const auto z = resolve_k0({3.0 * N0 / 4.0, 3.0 * N0 / 4.0}, N0);
    EXPECT_NEAR(z[0], N0 / 4.0, 1e-15);
    EXPECT_NEAR(z[1], N0 / 4.0, 1e-15);
}

TEST(ResolveK0, Corners)
{
    const auto origin = resolve_k0({-1.0, -1.0}, 1.0);
    EXPECT_EQ(origin[0], 0.0);
    EXPECT_EQ(origin[1], 0.0);
    const auto edge = resolve_k0({10.0, 10.0}, 1.0);
    EXPECT_DOUBLE_EQ(edge[0], 0.5);
    EXPECT_DOUBLE_EQ(edge[1], 0.5);
}

TEST(ResolveK0, EmptyTriangle)
{
    const auto z = resolve_k0({1.0, 2.0}, 0.0);
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
    EXPECT_THROW(resolve_k0({1.0, 2.0}, -0.1), DomainError);
}

TEST(ProjectK0, IdentityInsideAndOntoEdges)
{
    const auto in = project_k0({0.2, 0.3}, 1.0);
    EXPECT_EQ(in[0], 0.2);
    EXPECT_EQ(in[1], 0.3);
    const auto out = project_k0({0.8, 0.6}, 1.0);
    EXPECT_NEAR(out[0], 0.6, 1e-15);
    EXPECT_NEAR(out[1], 0.4, 1e-15);
    const auto neg = project_k0({-0.5, 0.3}, 1.0);
    EXPECT_EQ(neg[0], 0.0);
    EXPECT_NEAR(neg[1], 0.3, 1e-15);
}

TEST(MakeIdentProblem, RejectsInvalidInput)
{
    ModelParams p = base_params();
    p.l_A         = 2.0;
    EXPECT_THROW(make_ident_problem(p, Observations{0.01, 0.02, 0.1, 0.1, 5.0}, {}, 100), ValidationError);
    EXPECT_THROW(make_ident_problem(base_params(), Observations{0.01, 0.02, 0.1, 0.1, 0.0}, {}, 100),
                 ValidationError);
}

TEST(SolveP0, RecoversTerminalDataAndDecreasesCost)
{
    const Planted pl = planted(10.0, 0.4, 0.05, 0.03, IdentWeights{1e-6, 1e-6}, 4000);
    const IdentResult r = solve_p0(pl.prob, IdentConfig{});
    EXPECT_TRUE(r.converged) << r.status;
    EXPECT_LE(r.mismatch, 1e-10);
    EXPECT_LE(r.optimality_residual, 1e-6);
    ASSERT_FALSE(r.cost_history.empty());
    for (std::size_t k = 1; k < r.cost_history.size(); ++k) {
        EXPECT_LE(r.cost_history[k], r.cost_history[k - 1] * (1.0 + 1e-12));
    }
    EXPECT_GE(r.candidate.A0, 0.0);
    EXPECT_GE(r.candidate.I0, 0.0);
    EXPECT_LE(r.candidate.A0 + r.candidate.I0, pl.prob.N0());
    for (double v : r.candidate.beta_I.values()) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(SolveP0, HeavierBetaWeightShrinksBeta)
{
    const Planted pl = planted(10.0, 0.4, 0.05, 0.03, IdentWeights{1e-6, 1e-6}, 2000);
    double prev       = std::numeric_limits<double>::infinity();
    for (double a1 : {1e-4, 1e-3, 1e-2}) {
        IdentProblem prob = pl.prob;
        prob.weights      = IdentWeights{1e-6, a1};
        IdentResult r;
        try {
            r = solve_p0(prob, IdentConfig{});
        }
        catch (const StallError<IdentResult>& e) {
            r = e.best();
        }
        const Grid& g   = r.trajectory.grid;
        const double b2 = trapezoid(g, [&](std::size_t k) {
            const double b = r.candidate.beta_I(g.time(k));
            return b * b;
        });
        EXPECT_LE(b2, prev * (1.0 + 1e-6)) << "alpha1 = " << a1;
        prev = b2;
    }
}

} // namespace
} // namespace sailr
