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

// Random scenario generators shared by the unit and acceptance tests.

#ifndef SAILR_TESTS_SUPPORT_HPP
#define SAILR_TESTS_SUPPORT_HPP

#include "sailr/model.hpp"

#include <random>
#include <vector>

namespace sailr::testing {

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    /// Constant or piecewise linear on `knots` uniform knots over [0, T].
    CoefficientTable table(double lo, double hi, double T, int knots)
    {
        if (knots <= 1) {
            return CoefficientTable(uniform(lo, hi));
        }
        std::vector<double> v(static_cast<std::size_t>(knots));
        for (auto& x : v) {
            x = uniform(lo, hi);
        }
        return CoefficientTable::on_uniform_grid(0.0, T, std::move(v));
    }

    /// Admissible parameters; tables vary in time unless `constant`.
    ModelParams params(double T, bool constant = false, bool with_xi = true)
    {
        ModelParams p;
        p.sigma   = uniform(0.05, 0.5);
        p.mu_A    = uniform(0.01, 0.3);
        p.mu_I    = uniform(0.01, 0.3);
        p.mu_L    = uniform(0.01, 0.3);
        p.l_A     = uniform(0.0, 1.0);
        p.l_I     = uniform(0.0, 1.0);
        const int n = constant ? 1 : 6;
        p.beta_I  = table(0.0, 1.5, T, n);
        p.beta_A  = table(0.0, 1.5, T, n);
        p.xi      = with_xi ? table(0.0, 0.1, T, n) : CoefficientTable(0.0);
        p.N       = 1.0;
        return p;
    }

    /// Nonnegative state summing to 1.
    Vector5 state()
    {
        const double A = uniform(0.0, 0.1);
        const double I = uniform(0.0, 0.1);
        const double L = uniform(0.0, 0.05);
        const double R = uniform(0.0, 0.1);
        return make_state(1.0 - A - I - L - R, A, I, L, R);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace sailr::testing

#endif // SAILR_TESTS_SUPPORT_HPP
