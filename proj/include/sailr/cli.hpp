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
 * @file cli.hpp
 * @brief Batch command-line driver: simulate, identify, control, stability,
 *        synth.
 */

#ifndef SAILR_CLI_HPP
#define SAILR_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sailr {

inline constexpr int exit_ok           = 0;
inline constexpr int exit_error        = 1;
inline constexpr int exit_not_converged = 2;

struct CliInvocation {
    std::string subcommand;
    std::string scenario_path;
    std::string out_dir; ///< empty: $SAILR_OUT, then "sailr_out"
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    bool quiet    = false;
};

/// Runs one invocation; returns the exit status (0 converged, 2 valid but
/// not converged, 1 error). Messages go to `out` and `err`.
int run(const CliInvocation& inv, std::ostream& out, std::ostream& err);

/// Parses argv and calls run().
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace sailr

#endif // SAILR_CLI_HPP
