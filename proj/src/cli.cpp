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

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>

namespace sailr {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* spec, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

std::string g(double x) { return fmt("%.6g", x); }

// Thrown work carries the stage it failed in.
struct StageFailure : std::runtime_error {
    StageFailure(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f())
{
    try {
        return f();
    }
    catch (const StageFailure&) {
        throw;
    }
    catch (const std::exception& e) {
        throw StageFailure(stage, e.what());
    }
}

class Runner {
public:
    Runner(const Scenario& s, const fs::path& dir, const CliInvocation& inv, std::ostream& out, std::ostream& err)
        : s_(s), dir_(dir), inv_(inv), out_(out), err_(err)
    {
    }

    int simulate()
    {
        const Trajectory traj = in_stage("simulate", [&] { return sailr::simulate(s_.params, s_.x0, s_.grid); });
        write("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(p, traj); });
        write("summary.json", [&](const std::string& p) { write_text_file(p, summary_simulate(s_, traj)); });
        const auto [R0, Sb] = thresholds(s_.params, s_.grid.t0, s_.grid.T);
        line("task", "simulate");
        line("final L, R", g(traj.back()[comp::L]) + ", " + g(traj.back()[comp::R]));
        line("R0, S_bar", g(R0) + ", " + g(Sb));
        return exit_ok;
    }

    int identify()
    {
        const Observations& obs = *s_.observations;
        IdentResult r;
        in_stage("identify", [&] {
            const IdentProblem prob = make_ident_problem(s_.params, obs, s_.ident_weights, s_.ident_config.M);
            try {
                r = solve_p0(prob, s_.ident_config);
            }
            catch (const StallError<IdentResult>& e) {
                r = e.best();
                warn(e.what());
            }
            return 0;
        });
        write("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(p, r.trajectory); });
        write("adjoint.csv", [&](const std::string& p) { write_adjoint_csv(p, r.adjoint); });
        write("beta_I.csv", [&](const std::string& p) {
            std::vector<double> beta(r.trajectory.grid.size());
            for (std::size_t k = 0; k < beta.size(); ++k) {
                beta[k] = r.candidate.beta_I(r.trajectory.grid.time(k));
            }
            write_series_csv(p, r.trajectory.grid, beta, "beta_I");
        });
        write("summary.json", [&](const std::string& p) { write_text_file(p, summary_identify(s_, r)); });
        line("task", "identify");
        line("status", r.status);
        line("cost", g(r.cost));
        line("optimality residual", g(r.optimality_residual));
        line("terminal mismatch", g(r.mismatch));
        line("A0, I0", g(r.candidate.A0) + ", " + g(r.candidate.I0));
        line("mean beta_I", g(r.candidate.beta_I.mean(0.0, obs.T)));
        return r.converged ? exit_ok : exit_not_converged;
    }

    int control()
    {
        ControlResult r;
        std::optional<MultistartResult> ms;
        in_stage("control", [&] {
            if (s_.multistart) {
                ms = solve_p_multistart(s_.penalty, s_.params, s_.x0, s_.grid, s_.control_config, inv_.jobs);
                r  = ms->runs[ms->best];
            }
            else {
                r = solve_p(s_.penalty, s_.params, s_.x0, s_.grid, s_.control_config);
            }
            return 0;
        });
        for (const auto& w : r.warnings) {
            warn(w);
        }
        std::optional<TLoc> tloc;
        try {
            const ModelParams pc = s_.params.with_controls(r.controls.lA, r.controls.lI);
            tloc = compute_t_loc(make_t_loc_inputs(pc, r.trajectory, s_.penalty.alpha0, s_.penalty.Lhat, s_.tloc_C));
        }
        catch (const std::exception& e) {
            warn(std::string("T_loc not available: ") + e.what());
        }
        const double T = s_.grid.T - s_.grid.t0;
        if (tloc && T >= tloc->T_loc) {
            warn("horizon T = " + g(T) + " >= T_loc = " + g(tloc->T_loc) +
                 "; uniqueness of the optimal control is not guaranteed");
        }
        write("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(p, r.trajectory); });
        write("adjoint.csv", [&](const std::string& p) { write_adjoint_csv(p, r.adjoint); });
        write("summary.json",
              [&](const std::string& p) { write_text_file(p, summary_control(s_, r, ms ? &*ms : nullptr, tloc)); });
        const auto [R0, Sb] = thresholds(s_.params.with_controls(r.controls.lA, r.controls.lI), s_.grid.t0, s_.grid.T);
        line("task", "control");
        line("status", r.status);
        line("controls lA, lI", fmt("%.9f", r.controls.lA) + ", " + fmt("%.9f", r.controls.lI));
        line("cost", g(r.cost));
        line("limit residual", g(r.limit_residual));
        line("constraint violation", g(r.constraint_violation));
        line("R0, S_bar (controlled)", g(R0) + ", " + g(Sb));
        if (ms) {
            line("multistart disagreement", g(ms->disagreement));
        }
        if (tloc) {
            line("T_loc", g(tloc->T_loc));
        }
        return r.converged ? exit_ok : exit_not_converged;
    }

    int stability()
    {
        const StabilityReport rep =
            in_stage("stability", [&] { return simulate_extinction(s_.params, s_.x0, s_.extinction); });
        const Trajectory traj = in_stage("stability", [&] { return sailr::simulate(s_.params, s_.x0, s_.grid); });
        write("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(p, traj); });
        write("summary.json", [&](const std::string& p) { write_text_file(p, summary_stability(s_, rep)); });
        line("task", "stability");
        line("R0, S_bar", g(rep.R0) + ", " + g(rep.S_bar));
        line("S_tilde_inf", g(rep.S_tilde_inf));
        line("regime", to_string(rep.regime));
        line("extinction", std::string(rep.extinction ? "yes" : "no") + " at t = " + g(rep.final_time));
        line("hurwitz at limit", rep.at_limit.hurwitz ? "yes" : "no");
        return rep.extinction ? exit_ok : exit_not_converged;
    }

    int synth()
    {
        const SynthOutput o =
            in_stage("synth", [&] { return synth_observations(s_.params, s_.x0, s_.grid, *s_.synth); });
        write("trajectory.csv", [&](const std::string& p) { write_trajectory_csv(p, o.reference); });
        write("summary.json", [&](const std::string& p) { write_text_file(p, summary_synth(s_, o)); });
        write("identify_scenario.json", [&](const std::string& p) {
            Scenario id      = s_;
            id.task          = Task::identify;
            id.name          = s_.name.empty() ? "identify" : s_.name + "-identify";
            id.observations  = o.observations;
            id.synth.reset();
            write_text_file(p, scenario_to_json(id));
        });
        line("task", "synth");
        line("LT, RT", g(o.observations.LT) + ", " + g(o.observations.RT));
        return exit_ok;
    }

private:
    static std::pair<double, double> thresholds(const ModelParams& p, double t0, double T)
    {
        const ModelParams avg = averaged_params(p, t0, T);
        return {r0(avg), s_threshold(avg)};
    }

    template <typename F>
    void write(const std::string& name, F&& f)
    {
        const std::string path = (dir_ / name).string();
        in_stage("write " + path, [&] {
            f(path);
            return 0;
        });
    }

    void line(const std::string& key, const std::string& value)
    {
        if (!inv_.quiet) {
            out_ << "  " << key << ": " << value << "\n";
        }
    }

    void warn(const std::string& msg) { err_ << "warning: " << msg << "\n"; }

    const Scenario& s_;
    fs::path dir_;
    const CliInvocation& inv_;
    std::ostream& out_;
    std::ostream& err_;
};

} // namespace

int run(const CliInvocation& inv, std::ostream& out, std::ostream& err)
{
    try {
        const auto task = parse_task(inv.subcommand);
        if (!task) {
            err << "error: unknown subcommand '" << inv.subcommand << "'\n";
            return exit_error;
        }
        std::vector<std::string> overrides = inv.overrides;
        overrides.push_back("task=\"" + inv.subcommand + "\"");
        if (inv.seed) {
            overrides.push_back("seed=" + std::to_string(*inv.seed));
        }
        Scenario s;
        try {
            s = load_scenario(inv.scenario_path, overrides);
        }
        catch (const ValidationError& e) {
            err << "error: scenario " << inv.scenario_path << ":\n";
            for (const auto& m : e.errors()) {
                err << "  " << m << "\n";
            }
            return exit_error;
        }

        fs::path dir = inv.out_dir;
        if (dir.empty()) {
            const char* env = std::getenv("SAILR_OUT");
            dir             = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("sailr_out");
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            err << "error: output directory " << dir.string() << ": " << ec.message() << "\n";
            return exit_error;
        }
        if (!inv.quiet) {
            out << "sailr " << inv.subcommand << " " << inv.scenario_path << " -> " << dir.string() << "\n";
        }

        Runner runner(s, dir, inv, out, err);
        switch (*task) {
        case Task::simulate:
            return runner.simulate();
        case Task::identify:
            return runner.identify();
        case Task::control:
            return runner.control();
        case Task::stability:
            return runner.stability();
        case Task::synth:
            break;
        }
        return runner.synth();
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"SAILR epidemic model: simulation, identification, optimal isolation control, stability"};
    app.require_subcommand(1);

    CliInvocation inv;
    std::uint64_t seed = 0;
    app.add_option("--scenario", inv.scenario_path, "scenario JSON file")->required();
    app.add_option("--out", inv.out_dir, "output directory (default $SAILR_OUT, else sailr_out)");
    app.add_option("--set", inv.overrides, "override a scenario field, key=value (repeatable)")
        ->allow_extra_args(false);
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    app.add_option("--jobs", inv.jobs, "worker threads for multistart")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", inv.quiet, "suppress the human-readable summary");

    for (const char* name : {"simulate", "identify", "control", "stability", "synth"}) {
        app.add_subcommand(name, std::string("run task ") + name)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_error;
    }
    inv.subcommand = app.get_subcommands().front()->get_name();
    if (seed_opt->count() > 0) {
        inv.seed = seed;
    }
    return run(inv, out, err);
}

} // namespace sailr
