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
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sailr {
namespace {

ModelParams simple()
{
    ModelParams p;
    p.sigma  = 0.2;
    p.mu_A   = 0.1;
    p.l_A    = 0.1; // k1 = 0.4
    p.mu_I   = 0.1;
    p.l_I    = 0.1; // k2 = 0.2
    p.mu_L   = 0.05;
    p.beta_A = CoefficientTable(0.2);
    p.beta_I = CoefficientTable(0.3);
    return p;
}

std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v)
{
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

TEST(R0, WorkedExample)
{
    // k2 bA + sigma bI = 0.04 + 0.06; k1 k2 = 0.08
    EXPECT_DOUBLE_EQ(r0(simple()), 1.25);
    EXPECT_DOUBLE_EQ(s_threshold(simple()), 0.8);
}

TEST(R0, HomogeneousInTransmission)
{
    ModelParams p = simple();
    p.beta_A      = CoefficientTable(0.6);
    p.beta_I      = CoefficientTable(0.9);
    EXPECT_NEAR(r0(p), 3.0 * r0(simple()), 1e-14);
}

TEST(R0, AsymptomaticTransmissionContributesOverK1)
{
    ModelParams p = simple();
    p.beta_A      = CoefficientTable(0.4);
    EXPECT_NEAR(r0(p) - r0(simple()), 0.2 / 0.4, 1e-14);
}

TEST(R0, NoTransmission)
{
    ModelParams p = simple();
    p.beta_A      = CoefficientTable(0.0);
    p.beta_I      = CoefficientTable(0.0);
    EXPECT_EQ(r0(p), 0.0);
    EXPECT_EQ(s_threshold(p), std::numeric_limits<double>::infinity());
}

TEST(R0, TimeVaryingTablesMustBeAveraged)
{
    ModelParams p = simple();
    p.beta_I      = CoefficientTable({0.0, 10.0}, {0.2, 0.4});
    EXPECT_THROW(r0(p), DomainError);
    EXPECT_DOUBLE_EQ(r0(averaged_params(p, 0.0, 10.0)), r0(simple()));
}

TEST(InfectedJacobian, LowerTriangularWithoutSusceptibles)
{
    const ModelParams p      = simple();
    const Eigen::Matrix3d J  = infected_jacobian(0.0, p);
    const auto ev            = J.eigenvalues();
    std::vector<std::complex<double>> got(ev.data(), ev.data() + 3);
    const std::vector<std::complex<double>> want{-0.4, -0.2, -0.05};
    const auto g = sorted(got), w = sorted(want);
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(std::abs(g[k] - w[k]), 0.0, 1e-14);
    }
    EXPECT_TRUE(hurwitz_check(0.0, p).hurwitz);
}

TEST(HurwitzCheck, EigenvaluesMatchDenseSolver)
{
    testing::Draw draw(71);
    for (int n = 0; n < 50; ++n) {
        const ModelParams p = draw.params(1.0, true, false);
        const double S      = draw.uniform(0.0, 1.0);
        const auto h        = hurwitz_check(S, p);
        Eigen::EigenSolver<Eigen::Matrix3d> es(infected_jacobian(S, p));
        std::vector<std::complex<double>> got(h.eigenvalues.begin(), h.eigenvalues.end());
        std::vector<std::complex<double>> ref(es.eigenvalues().data(), es.eigenvalues().data() + 3);
        const auto g = sorted(got), r = sorted(ref);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(std::abs(g[k] - r[k]), 0.0, 1e-10 * (1.0 + std::abs(r[k])));
        }
        const double max_re =
            std::max({g[0].real(), g[1].real(), g[2].real()});
        EXPECT_EQ(h.hurwitz, max_re < 0.0) << "draw " << n;
    }
}

TEST(HurwitzCheck, FlipsAtThreshold)
{
    testing::Draw draw(72);
    for (int n = 0; n < 100; ++n) {
        const ModelParams p = draw.params(1.0, true, false);
        const double Sb     = s_threshold(p);
        if (!(Sb < 1.0)) {
            continue;
        }
        EXPECT_TRUE(hurwitz_check(Sb * (1.0 - 1e-6), p).hurwitz);
        EXPECT_FALSE(hurwitz_check(std::min(1.0, Sb * (1.0 + 1e-6)), p).hurwitz);
    }
}

TEST(HurwitzCheck, MarginalWithoutRelease)
{
    ModelParams p = simple();
    p.mu_L        = 0.0;
    EXPECT_TRUE(hurwitz_check(0.1, p).marginal);
    EXPECT_FALSE(hurwitz_check(0.1, simple()).marginal);
}

TEST(Extinction, DiseaseFreeStateIsAlreadyExtinct)
{
    const Vector5 x0 = make_state(0.97, 0.0, 0.0, 0.0, 0.03);
    const auto rep   = simulate_extinction(simple(), x0);
    EXPECT_TRUE(rep.extinction);
    EXPECT_EQ(rep.S_tilde_inf, 0.97);
    EXPECT_NEAR(rep.conservation_error, 0.0, 1e-15);
}

TEST(Extinction, SubcriticalOutbreakDiesOut)
{
    ModelParams p = simple();
    p.l_A         = 0.5;
    p.l_I         = 0.5;
    const Vector5 x0 = make_state(0.9, 0.04, 0.03, 0.01, 0.02);
    ASSERT_LT(r0(p) * 0.9, 1.0);
    const auto rep = simulate_extinction(p, x0);
    EXPECT_TRUE(rep.extinction);
    EXPECT_EQ(rep.regime, Regime::subcritical);
    EXPECT_TRUE(rep.S_monotone);
    EXPECT_LE(rep.S_tilde_inf, 0.9);
    EXPECT_TRUE(rep.at_limit.hurwitz);
    EXPECT_LE(rep.conservation_error, 1e-7);
}

TEST(Extinction, SupercriticalOutbreakEndsBelowThreshold)
{
    ModelParams p = simple();
    p.beta_I      = CoefficientTable(0.6);
    const Vector5 x0 = make_state(0.95, 0.02, 0.01, 0.0, 0.02);
    ASSERT_GT(r0(p) * 0.95, 1.0);
    const auto rep = simulate_extinction(p, x0);
    EXPECT_TRUE(rep.extinction);
    EXPECT_LT(rep.S_tilde_inf, rep.S_bar + 1e-6);
    EXPECT_TRUE(rep.below_threshold);
    EXPECT_TRUE(rep.S_monotone);
}

TEST(Extinction, RejectsUnsupportedInput)
{
    ModelParams p = simple();
    p.xi          = CoefficientTable(0.01);
    const Vector5 x0 = make_state(0.9, 0.04, 0.03, 0.01, 0.02);
    EXPECT_THROW(simulate_extinction(p, x0), DomainError);
    p.xi     = CoefficientTable(0.0);
    p.beta_I = CoefficientTable({0.0, 10.0}, {0.2, 0.4});
    EXPECT_THROW(simulate_extinction(p, x0), DomainError);
}

TLocInputs tloc_inputs()
{
    TLocInputs in;
    in.y1     = 0.005;
    in.rho    = 0.05;
    in.F0     = 0.01;
    in.F1     = 0.1;
    in.F2     = 0.1;
    in.G      = 0.5;
    in.alpha0 = 1.0;
    in.mu_L   = 0.05;
    return in;
}

double growth(double G, double t) { return t * std::sqrt(t) * std::exp(G * t); }

TEST(TLoc, RootsSolveTheirEquations)
{
    const TLocInputs in = tloc_inputs();
    const TLoc t        = compute_t_loc(in);
    EXPECT_NEAR(4.0 * in.mu_L * in.alpha0 * growth(in.G, t.T1), 1.0, 1e-10);
    EXPECT_NEAR(in.F0 + 4.0 * in.alpha0 * (in.F1 + in.rho * in.mu_L) * growth(in.G, t.T2), in.rho, 1e-10);
    EXPECT_EQ(t.T_loc, std::min(t.T1, t.T2));
}

TEST(TLoc, NoReleaseRemovesFirstBound)
{
    TLocInputs in = tloc_inputs();
    in.mu_L       = 0.0;
    const TLoc t  = compute_t_loc(in);
    EXPECT_EQ(t.T1, std::numeric_limits<double>::infinity());
    EXPECT_EQ(t.T_loc, t.T2);
}

TEST(TLoc, ShrinksWithGrowthRate)
{
    TLocInputs in = tloc_inputs();
    double prev   = std::numeric_limits<double>::infinity();
    for (double G : {0.0, 0.5, 1.0, 2.0}) {
        in.G           = G;
        const double t = compute_t_loc(in).T_loc;
        EXPECT_LT(t, prev);
        prev = t;
    }
}

TEST(TLoc, InputChecks)
{
    TLocInputs in = tloc_inputs();
    EXPECT_TRUE(check_t_loc_inputs(in, 0.01, 0.09).empty());
    in.F0 = 0.06;
    EXPECT_THROW(compute_t_loc(in), ValidationError);
    EXPECT_FALSE(check_t_loc_inputs(in, 0.01, 0.09).empty());
}

} // namespace
} // namespace sailr
