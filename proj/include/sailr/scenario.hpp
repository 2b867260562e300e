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
 * @file scenario.hpp
 * @brief Scenario documents (JSON), synthetic observations and result
 *        export. The schema is described in docs/scenario-schema.md.
 */

#ifndef SAILR_SCENARIO_HPP
#define SAILR_SCENARIO_HPP

#include "sailr/control.hpp"
#include "sailr/identification.hpp"
#include "sailr/integrator.hpp"
#include "sailr/model.hpp"
#include "sailr/stability.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sailr {

enum class Task { simulate, identify, control, stability, synth };

std::string to_string(Task t);
std::optional<Task> parse_task(const std::string& s);

/// Planted truth for synthetic observations.
struct SynthSpec {
    CoefficientTable beta_I{0.0};
    double A0    = 0.0;
    double I0    = 0.0;
    double noise = 0.0; ///< half-width of the additive uniform noise on LT, RT
    std::uint64_t seed = 0;
};

struct Scenario {
    std::string name;
    std::string description;
    Task task = Task::simulate;

    ModelParams params;
    Vector5 x0 = Vector5::Zero();
    Grid grid{0.0, 1.0, 10000};

    std::optional<Observations> observations;
    IdentWeights ident_weights;
    IdentConfig ident_config;

    PenaltyConfig penalty;
    ControlSolverConfig control_config;
    bool multistart = true;

    ExtinctionConfig extinction;
    double tloc_C = 1.0;

    std::optional<SynthSpec> synth;
    std::uint64_t seed = 0;
};

/// Parse or validation failure; what() joins all messages.
class ScenarioError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Parses a scenario document. Overrides ("params.sigma=0.3",
/// "control.eps_schedule=[0.1,0.05]") are applied to the document before
/// validation; values are read as JSON when they parse, else as strings.
/// Throws ScenarioError with every problem found.
Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides = {},
                        const std::string& source = "<scenario>");

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// Complete document for s (every field, defaults included).
std::string scenario_to_json(const Scenario& s);

/// Minimal valid scenario of the given task with all defaults.
Scenario default_scenario(Task task);

struct SynthOutput {
    Observations observations;
    Trajectory reference;
};

/// Forward solve of the planted truth on `grid` from
/// (N - L0 - R0 - A0 - I0, A0, I0, L0, R0), with (L0, R0) taken from x0.
SynthOutput synth_observations(const ModelParams& params, const Vector5& x0, const Grid& grid,
                               const SynthSpec& spec);

/// Uniform double in [0, 1) from the top 53 bits; platform independent.
double unit_uniform(std::uint64_t bits);

// ---- export ---------------------------------------------------------------

/// Header t,S,A,I,L,R; 17 significant digits; LF line endings.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Header t,p,q,d,e,f.
void write_adjoint_csv(const std::string& path, const AdjointTrajectory& adj);

/// Header t,<name>.
void write_series_csv(const std::string& path, const Grid& grid, const std::vector<double>& values,
                      const std::string& name);

std::string trajectory_csv(const Trajectory& traj);

/// Rows of a CSV written by write_trajectory_csv: (t, S, A, I, L, R).
std::vector<std::array<double, 6>> read_trajectory_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

/// Deterministic work counters reported as "runtime".
struct RuntimeCounters {
    long forward_solves = 0;
    long adjoint_solves = 0;
    long iterations     = 0;
    long steps          = 0;
};

/// Summary documents; keys in fixed order: task, cost, cost_history,
/// residuals, controls|candidate, R0, S_bar, constraint_violation, seed,
/// runtime, then task-specific details.
std::string summary_simulate(const Scenario& s, const Trajectory& traj);
std::string summary_identify(const Scenario& s, const IdentResult& r);
std::string summary_control(const Scenario& s, const ControlResult& r, const MultistartResult* ms,
                            const std::optional<TLoc>& tloc);
std::string summary_stability(const Scenario& s, const StabilityReport& r);
std::string summary_synth(const Scenario& s, const SynthOutput& out);

} // namespace sailr

#endif // SAILR_SCENARIO_HPP
