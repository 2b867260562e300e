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

#include "sailr/integrator.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace sailr {
namespace {

TEST(Grid, Validates)
{
    EXPECT_THROW(Grid(0.0, 0.0, 10), DomainError);
    EXPECT_THROW(Grid(0.0, 1.0, 0), DomainError);
    const Grid g(1.0, 3.0, 4);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(g.time(4), 3.0);
    EXPECT_DOUBLE_EQ(g.h(), 0.5);
}

TEST(IntegrateForward, ZeroFieldKeepsInitialValue)
{
    const Grid g(0.0, 1.0, 50);
    const Vector5 x0 = make_state(0.1, 0.2, 0.3, 0.2, 0.2);
    const auto out   = integrate_forward([](double, const Vector5&) { return Vector5(Vector5::Zero()); }, x0, g);
    ASSERT_EQ(out.size(), 51u);
    for (const auto& x : out) {
        EXPECT_EQ(x, x0);
    }
}

TEST(IntegrateForward, ScalarExponential)
{
    const Grid g(0.0, 1.0, 1000);
    const auto out = integrate_forward([](double, double x) { return -x; }, 1.0, g);
    EXPECT_NEAR(out.back(), std::exp(-1.0), 1e-10);
}

TEST(IntegrateForward, NonFiniteIsReported)
{
    const Grid g(0.0, 1.0, 10);
    EXPECT_THROW(integrate_forward([](double, double x) { return x * x * 1e300; }, 1.0, g), IntegrationError);
    EXPECT_THROW(integrate_forward([](double, double x) { return x; }, std::nan(""), g), IntegrationError);
}

TEST(IntegrateBackward, ZeroData)
{
    const Grid g(0.0, 2.0, 20);
    const auto out = integrate_backward([](double, double x) { return -x; }, 0.0, g);
    for (double y : out) {
        EXPECT_EQ(y, 0.0);
    }
}

TEST(IntegrateBackward, ScalarExponential)
{
    const Grid g(0.0, 1.0, 1000);
    const auto out = integrate_backward([](double, double x) { return -x; }, std::exp(-1.0), g);
    EXPECT_NEAR(out.front(), 1.0, 1e-9);
    EXPECT_EQ(out.back(), std::exp(-1.0));
}

TEST(IntegrateBackward, RoundTripOfFrozenLinearSystem)
{
    Eigen::Matrix<double, 5, 5> A;
    A.setRandom();
    A *= 0.5;
    auto f = [&](double, const Vector5& x) { return Vector5(A * x); };
    const Grid g(0.0, 2.0, 2000);
    const Vector5 xT  = make_state(0.3, -0.2, 0.1, 0.7, 0.4);
    const auto back   = integrate_backward(f, xT, g);
    const auto fwd    = integrate_forward(f, back.front(), g);
    EXPECT_LE((fwd.back() - xT).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Sample, HitsGridPointsExactly)
{
    const Grid g(0.0, 1.0, 10);
    std::vector<double> v(11);
    std::iota(v.begin(), v.end(), 0.0);
    for (std::size_t k = 0; k <= 10; ++k) {
        EXPECT_EQ(sample(g, v, g.time(k)), v[k]);
    }
}

TEST(Sample, LinearInterpolationBetweenPoints)
{
    const Grid g(0.0, 1.0, 4);
    const std::vector<double> v{1.0, 3.0, 5.0, 7.0, 9.0};
    EXPECT_DOUBLE_EQ(sample(g, v, 0.125), 2.0);
    const std::vector<double> c(5, 0.7);
    EXPECT_EQ(sample(g, c, 0.61), 0.7);
    EXPECT_THROW(sample(g, v, 1.5), DomainError);
}

TEST(Trapezoid, WeightsMatchRule)
{
    const Grid g(0.0, 3.0, 7);
    const auto w = trapezoid_weights(g);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 3.0, 1e-15);
    const double direct = trapezoid(g, [&](std::size_t k) { return g.time(k) * g.time(k); });
    double weighted     = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        weighted += w[k] * g.time(k) * g.time(k);
    }
    EXPECT_NEAR(direct, weighted, 1e-14);
}

TEST(Simulate, FrozenDynamicsStayConstant)
{
    const ModelParams p;
    const Vector5 x0  = make_state(0.5, 0.1, 0.1, 0.1, 0.2);
    const Trajectory tr = simulate(p, x0, Grid(0.0, 10.0, 100));
    for (const auto& x : tr.values) {
        EXPECT_EQ(x, x0);
    }
}

TEST(Simulate, FirstSampleIsInitialState)
{
    testing::Draw draw(3);
    const ModelParams p = draw.params(5.0);
    const Vector5 x0    = draw.state();
    const Trajectory tr = simulate(p, x0, Grid(0.0, 5.0, 500));
    EXPECT_EQ(tr.front(), x0);
    EXPECT_EQ(tr.size(), 501u);
}

TEST(Simulate, ConservesPopulationAndStaysNonnegative)
{
    testing::Draw draw(5);
    for (int k = 0; k < 10; ++k) {
        const ModelParams p = draw.params(20.0);
        const Trajectory tr = simulate(p, draw.state(), Grid(0.0, 20.0, 2000));
        for (const auto& x : tr.values) {
            EXPECT_NEAR(x.sum(), 1.0, 1e-12);
            EXPECT_GE(x.minCoeff(), -1e-10);
        }
    }
}

TEST(Simulate, TablesMustCoverTheGrid)
{
    ModelParams p;
    p.beta_I = CoefficientTable({0.0, 1.0}, {0.1, 0.2});
    EXPECT_THROW(simulate(p, make_state(1, 0, 0, 0, 0), Grid(0.0, 2.0, 10)), DomainError);
}

TEST(Simulate, FourthOrderConvergence)
{
    // beta = 0: A' = -k1 A
    ModelParams p;
    p.sigma = 0.8;
    p.mu_A  = 0.7;
    p.mu_I  = 0.3;
    const Vector5 x0 = make_state(0.2, 0.6, 0.1, 0.05, 0.05);
    const double exact = 0.6 * std::exp(-1.5 * 2.0);
    double prev        = 0.0;
    for (std::size_t M : {100, 200, 400}) {
        const double err = std::abs(simulate(p, x0, Grid(0.0, 2.0, M)).back()[comp::A] - exact);
        if (prev > 0.0) {
            EXPECT_GT(prev / err, 12.0);
            EXPECT_LT(prev / err, 20.0);
        }
        prev = err;
    }
}

} // namespace
} // namespace sailr
