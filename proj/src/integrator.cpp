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

namespace sailr {

std::vector<double> trapezoid_weights(const Grid& g)
{
    std::vector<double> w(g.size(), g.h());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

Trajectory simulate(const ModelParams& params, const Vector5& x0, const Grid& grid)
{
    if (!params.beta_I.covers(grid.t0, grid.T) || !params.beta_A.covers(grid.t0, grid.T) ||
        !params.xi.covers(grid.t0, grid.T)) {
        throw DomainError("coefficient tables do not cover the integration interval");
    }
    auto field = [&params](double t, const Vector5& x) { return rhs(x, params, t); };
    return Trajectory{grid, integrate_forward(field, x0, grid)};
}

} // namespace sailr
