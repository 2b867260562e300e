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

#include "sailr/cli.hpp"
#include "sailr/scenario.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sailr {
namespace {

namespace fs = std::filesystem;

std::string scenario(const std::string& name) { return std::string(SAILR_SCENARIO_DIR) + "/" + name; }

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "sailr");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream out, err;
    Outcome r;
    r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out  = out.str();
    r.err  = err.str();
    return r;
}

fs::path fresh(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("sailr_cli_" + name);
    fs::remove_all(d);
    return d;
}

TEST(Cli, ZeroDynamicsKeepsStateConstant)
{
    const fs::path d = fresh("zero");
    const Outcome r = invoke({"simulate", "--scenario", scenario("simulate_zero_dynamics.json"), "--out", d.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    const auto rows = read_trajectory_csv((d / "trajectory.csv").string());
    ASSERT_EQ(rows.size(), 1001u);
    for (const auto& row : rows) {
        for (int c = 1; c < 6; ++c) {
            EXPECT_EQ(row[c], rows.front()[c]);
        }
    }
    EXPECT_TRUE(fs::exists(d / "summary.json"));
    fs::remove_all(d);
}

TEST(Cli, SynthThenIdentify)
{
    const fs::path d = fresh("synth");
    const Outcome s = invoke({"synth", "--scenario", scenario("synth_planted.json"), "--out", d.string(), "--quiet"});
    ASSERT_EQ(s.code, exit_ok) << s.err;
    EXPECT_TRUE(s.out.empty());
    const fs::path id = d / "identify_scenario.json";
    ASSERT_TRUE(fs::exists(id));
    const Outcome r = invoke({"identify", "--scenario", id.string(), "--out", (d / "id").string()});
    EXPECT_EQ(r.code, exit_ok) << r.err;
    std::ifstream in(d / "id" / "summary.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["task"], "identify");
    EXPECT_LE(j["residuals"]["optimality_residual"].get<double>(), 1e-6);
    EXPECT_TRUE(fs::exists(d / "id" / "beta_I.csv"));
    fs::remove_all(d);
}

TEST(Cli, BoundBelowInitialIsolatedIsAScenarioError)
{
    const fs::path d = fresh("lhat");
    const Outcome r = invoke({"control", "--scenario", scenario("control_binding.json"), "--out", d.string(), "--set",
                               "control.Lhat=0.005"});
    EXPECT_EQ(r.code, exit_error);
    EXPECT_NE(r.err.find("Lhat must exceed L0"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(d / "summary.json"));
    fs::remove_all(d);
}

TEST(Cli, ReportsAllScenarioErrors)
{
    const Outcome r = invoke({"simulate", "--scenario", scenario("simulate_basic.json"), "--out", fresh("errs").string(),
                          "--set", "params.l_A=1.5", "--set", "foo.bar=1"});
    EXPECT_EQ(r.code, exit_error);
    EXPECT_NE(r.err.find("l_A out of [0,1]"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("unknown field foo"), std::string::npos) << r.err;
}

TEST(Cli, OutputDirectoryFromEnvironment)
{
    const fs::path d = fresh("env");
    ASSERT_EQ(setenv("SAILR_OUT", d.string().c_str(), 1), 0);
    const Outcome r = invoke({"simulate", "--scenario", scenario("simulate_basic.json"), "--quiet"});
    unsetenv("SAILR_OUT");
    EXPECT_EQ(r.code, exit_ok) << r.err;
    EXPECT_TRUE(fs::exists(d / "trajectory.csv"));
    fs::remove_all(d);
}

TEST(Cli, BadArguments)
{
    EXPECT_EQ(invoke({"simulate"}).code, exit_error);
    EXPECT_EQ(invoke({"--scenario", scenario("simulate_basic.json")}).code, exit_error);
    EXPECT_EQ(invoke({"simulate", "--scenario", scenario("simulate_basic.json"), "--jobs", "0"}).code, exit_error);
    EXPECT_EQ(invoke({"simulate", "--scenario", "/nonexistent/x.json", "--out", fresh("none").string()}).code,
              exit_error);
}

TEST(Cli, HelpExitsCleanly)
{
    const Outcome r = invoke({"--help"});
    EXPECT_EQ(r.code, exit_ok);
    EXPECT_NE(r.out.find("--scenario"), std::string::npos);
}

TEST(Cli, StabilityExitCodeFollowsExtinction)
{
    const fs::path d = fresh("stab");
    const Outcome r = invoke({"stability", "--scenario", scenario("stability_subcritical.json"), "--out", d.string()});
    EXPECT_EQ(r.code, exit_ok) << r.err;
    EXPECT_NE(r.out.find("regime: subcritical"), std::string::npos) << r.out;
    fs::remove_all(d);
}

} // namespace
} // namespace sailr
