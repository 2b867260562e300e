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

#include "sailr/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace sailr {

using json         = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

using Errors = std::vector<std::string>;

std::string join_path(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

std::string type_name(const json& j)
{
    return j.type_name();
}

// Typed access to one JSON object with error collection. Keys that are
// never read are reported as unknown by finish().
class Block {
public:
    Block(const json* j, std::string path, Errors& errs) : j_(j), path_(std::move(path)), errs_(errs)
    {
        if (j_ != nullptr && !j_->is_object()) {
            errs_.push_back(path_ + ": expected an object, got " + type_name(*j_));
            j_ = nullptr;
        }
    }

    bool present() const noexcept { return j_ != nullptr; }
    const std::string& path() const noexcept { return path_; }

    bool has(const char* key)
    {
        seen_.insert(key);
        return j_ != nullptr && j_->contains(key);
    }

    const json* get(const char* key)
    {
        seen_.insert(key);
        if (j_ == nullptr) {
            return nullptr;
        }
        auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }

    double number(const char* key, double def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        if (!v->is_number()) {
            errs_.push_back(join_path(path_, key) + ": expected a number, got " + type_name(*v));
            return def;
        }
        const double x = v->get<double>();
        if (!std::isfinite(x)) {
            errs_.push_back(join_path(path_, key) + ": must be finite");
        }
        return x;
    }

    double required_number(const char* key, const std::string& why)
    {
        if (!has(key)) {
            errs_.push_back(join_path(path_, key) + " required" + why);
            return std::numeric_limits<double>::quiet_NaN();
        }
        return number(key, 0.0);
    }

    long integer(const char* key, long def, long min_value)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        if (!v->is_number_integer()) {
            errs_.push_back(join_path(path_, key) + ": expected an integer, got " + type_name(*v));
            return def;
        }
        const long x = v->get<long>();
        if (x < min_value) {
            errs_.push_back(join_path(path_, key) + " must be >= " + std::to_string(min_value));
        }
        return x;
    }

    std::uint64_t u64(const char* key, std::uint64_t def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        if (v->is_number_unsigned()) {
            return v->get<std::uint64_t>();
        }
        if (v->is_number_integer() && v->get<long long>() >= 0) {
            return static_cast<std::uint64_t>(v->get<long long>());
        }
        errs_.push_back(join_path(path_, key) + ": expected an unsigned integer");
        return def;
    }

    bool boolean(const char* key, bool def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        if (!v->is_boolean()) {
            errs_.push_back(join_path(path_, key) + ": expected true or false, got " + type_name(*v));
            return def;
        }
        return v->get<bool>();
    }

    std::string string(const char* key, const std::string& def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        if (!v->is_string()) {
            errs_.push_back(join_path(path_, key) + ": expected a string, got " + type_name(*v));
            return def;
        }
        return v->get<std::string>();
    }

    std::vector<double> numbers(const char* key, const std::vector<double>& def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        return number_array(*v, join_path(path_, key), def);
    }

    std::optional<CoefficientTable> table(const char* key, const CoefficientTable& def)
    {
        const json* v = get(key);
        if (v == nullptr) {
            return def;
        }
        const std::string where = join_path(path_, key);
        if (v->is_number()) {
            const double x = v->get<double>();
            if (!std::isfinite(x) || x < 0.0) {
                errs_.push_back(where + ": negative coefficient or non-finite value");
                return std::nullopt;
            }
            return CoefficientTable(x);
        }
        if (v->is_object()) {
            Block b(v, where, errs_);
            const std::vector<double> knots  = b.numbers("knots", {});
            const std::vector<double> values = b.numbers("values", {});
            b.finish();
            Errors local = PiecewiseLinear::check(where, knots, values, true);
            if (!local.empty()) {
                errs_.insert(errs_.end(), local.begin(), local.end());
                return std::nullopt;
            }
            return CoefficientTable(knots, values);
        }
        errs_.push_back(where + ": expected a number or {knots, values}, got " + type_name(*v));
        return std::nullopt;
    }

    Block child(const char* key) { return Block(get(key), join_path(path_, key), errs_); }

    void finish()
    {
        if (j_ == nullptr) {
            return;
        }
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (seen_.count(it.key()) == 0) {
                errs_.push_back("unknown field " + join_path(path_, it.key()));
            }
        }
    }

private:
    std::vector<double> number_array(const json& v, const std::string& where, const std::vector<double>& def)
    {
        if (!v.is_array()) {
            errs_.push_back(where + ": expected an array of numbers, got " + type_name(v));
            return def;
        }
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number()) {
                errs_.push_back(where + "[" + std::to_string(k) + "]: expected a number");
                return def;
            }
            out.push_back(v[k].get<double>());
        }
        return out;
    }

    const json* j_;
    std::string path_;
    Errors& errs_;
    std::set<std::string> seen_;
};

ordered_json table_ordered(const CoefficientTable& t)
{
    if (t.is_constant()) {
        return t.values().front();
    }
    ordered_json j;
    j["knots"]  = t.knots();
    j["values"] = t.values();
    return j;
}

void apply_override(json& doc, const std::string& item, Errors& errs)
{
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
        errs.push_back("override '" + item + "': expected key=value");
        return;
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    }
    catch (const json::parse_error&) {
        value = raw;
    }
    std::string pointer;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) {
            errs.push_back("override '" + item + "': empty path component");
            return;
        }
        pointer += "/" + part;
    }
    try {
        doc[json::json_pointer(pointer)] = value;
    }
    catch (const json::exception& e) {
        errs.push_back("override '" + key + "': " + e.what());
    }
}

bool covers_grid(const CoefficientTable& t, double t0, double T)
{
    return t.is_constant() || t.covers(t0, T);
}

void check_coverage(const ModelParams& p, double t0, double T, Errors& errs)
{
    for (const auto& [name, table] : {std::pair<const char*, const CoefficientTable*>{"beta_I", &p.beta_I},
                                      {"beta_A", &p.beta_A},
                                      {"xi", &p.xi}}) {
        if (!covers_grid(*table, t0, T)) {
            std::ostringstream os;
            os << "params." << name << " does not cover [" << t0 << ", " << T << "]";
            errs.push_back(os.str());
        }
    }
}

std::string format17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    return out;
}

template <typename Path>
std::string path_csv(const Path& path, const char* header)
{
    std::string s = header;
    s += '\n';
    for (std::size_t k = 0; k < path.size(); ++k) {
        s += format17(path.grid.time(k));
        for (int c = 0; c < 5; ++c) {
            s += ',';
            s += format17(path[k][c]);
        }
        s += '\n';
    }
    return s;
}

} // namespace

std::string to_string(Task t)
{
    switch (t) {
    case Task::simulate:
        return "simulate";
    case Task::identify:
        return "identify";
    case Task::control:
        return "control";
    case Task::stability:
        return "stability";
    case Task::synth:
        break;
    }
    return "synth";
}

std::optional<Task> parse_task(const std::string& s)
{
    for (Task t : {Task::simulate, Task::identify, Task::control, Task::stability, Task::synth}) {
        if (to_string(t) == s) {
            return t;
        }
    }
    return std::nullopt;
}

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides, const std::string& source)
{
    json doc;
    try {
        doc = json::parse(text);
    }
    catch (const json::parse_error& e) {
        throw ScenarioError({source + ": " + e.what()});
    }
    Errors errs;
    for (const auto& o : overrides) {
        apply_override(doc, o, errs);
    }
    if (!errs.empty()) {
        throw ScenarioError(std::move(errs));
    }

    Scenario s;
    Block root(&doc, "", errs);
    if (!root.present()) {
        throw ScenarioError(std::move(errs));
    }
    s.name             = root.string("name", "");
    s.description      = root.string("description", "");
    const auto task_nm = root.string("task", "simulate");
    if (auto t = parse_task(task_nm)) {
        s.task = *t;
    }
    else {
        errs.push_back("task: unknown task '" + task_nm + "' (simulate, identify, control, stability, synth)");
    }
    s.seed                = root.u64("seed", 0);
    const std::string why = " for task=" + to_string(s.task);

    // params
    {
        if (!root.has("params")) {
            errs.push_back("params required" + why);
        }
        Block b = root.child("params");
        ModelParams& p = s.params;
        p.sigma        = b.number("sigma", 0.0);
        p.mu_A         = b.number("mu_A", 0.0);
        p.mu_I         = b.number("mu_I", 0.0);
        p.mu_L         = b.number("mu_L", 0.0);
        p.l_A          = b.number("l_A", 0.0);
        p.l_I          = b.number("l_I", 0.0);
        if (auto t = b.table("beta_I", CoefficientTable(0.0))) {
            p.beta_I = *t;
        }
        if (auto t = b.table("beta_A", CoefficientTable(0.0))) {
            p.beta_A = *t;
        }
        if (auto t = b.table("xi", CoefficientTable(0.0))) {
            p.xi = *t;
        }
        p.N = 1.0;
        b.finish();
        if (b.present()) {
            for (auto& e : check_params(p)) {
                errs.push_back(e);
            }
        }
    }

    // initial state
    const bool needs_state = s.task != Task::identify || (!root.has("observations") && root.has("synth"));
    {
        if (needs_state && !root.has("initial_state")) {
            errs.push_back("initial_state required" + why);
        }
        Block b = root.child("initial_state");
        s.x0    = make_state(b.number("S", 0.0), b.number("A", 0.0), b.number("I", 0.0), b.number("L", 0.0),
                             b.number("R", 0.0));
        b.finish();
        if (b.present()) {
            if ((s.x0.array() < 0.0).any()) {
                errs.push_back("initial_state: components must be >= 0");
            }
            if (std::abs(s.x0.sum() - s.params.N) > 1e-12 * s.params.N) {
                errs.push_back("initial_state must sum to N = 1");
            }
        }
    }

    // grid
    const bool needs_grid = s.task == Task::simulate || s.task == Task::control || s.task == Task::synth ||
                            (s.task == Task::identify && !root.has("observations") && root.has("synth"));
    {
        if (needs_grid && !root.has("grid")) {
            errs.push_back("grid required" + why);
        }
        Block b      = root.child("grid");
        const double t0 = b.number("t0", 0.0);
        const double T  = needs_grid ? (b.present() ? b.required_number("T", why) : 1.0) : b.number("T", 1.0);
        const long M    = b.integer("M", 10000, 1);
        b.finish();
        if (!(T > t0)) {
            errs.push_back("grid: T must be > t0");
        }
        else if (M >= 1 && std::isfinite(t0) && std::isfinite(T)) {
            s.grid = Grid(t0, T, static_cast<std::size_t>(M));
        }
        if (needs_grid && b.present() && T > t0) {
            check_coverage(s.params, t0, T, errs);
        }
    }

    // observations
    {
        const bool needs_obs = s.task == Task::identify;
        if (needs_obs && !root.has("observations") && !root.has("synth")) {
            errs.push_back("observations required" + why);
        }
        Block b = root.child("observations");
        if (b.present()) {
            Observations obs;
            const std::string w = needs_obs ? why : std::string();
            obs.L0              = b.required_number("L0", w);
            obs.R0              = b.required_number("R0", w);
            obs.LT              = b.required_number("LT", w);
            obs.RT              = b.required_number("RT", w);
            obs.T               = b.required_number("T", w);
            for (auto& e : check_observations(obs, s.params.N)) {
                errs.push_back(e);
            }
            if (needs_obs && obs.T > 0.0) {
                check_coverage(s.params, 0.0, obs.T, errs);
            }
            s.observations = obs;
        }
        b.finish();
    }

    // identify
    {
        Block b             = root.child("identify");
        IdentWeights& w     = s.ident_weights;
        IdentConfig& c      = s.ident_config;
        w.alpha0            = b.number("alpha0", w.alpha0);
        w.alpha1            = b.number("alpha1", w.alpha1);
        c.M                 = static_cast<std::size_t>(b.integer("M", static_cast<long>(c.M), 1));
        c.beta_init         = b.number("beta_init", c.beta_init);
        c.tol               = b.number("tol", c.tol);
        c.max_iters         = static_cast<int>(b.integer("max_iters", c.max_iters, 1));
        c.max_backtracks    = static_cast<int>(b.integer("max_backtracks", c.max_backtracks, 1));
        c.gradient_iters    = static_cast<int>(b.integer("gradient_iters", c.gradient_iters, 0));
        c.krylov_dim        = static_cast<int>(b.integer("krylov_dim", c.krylov_dim, 1));
        c.continuation_start = b.number("continuation_start", c.continuation_start);
        c.stage_tol         = b.number("stage_tol", c.stage_tol);
        b.finish();
        if (w.alpha0 < 0.0 || w.alpha1 < 0.0) {
            errs.push_back("identify: alpha0 and alpha1 must be >= 0");
        }
        if (c.beta_init < 0.0) {
            errs.push_back("identify.beta_init must be >= 0");
        }
        if (!(c.tol > 0.0) || !(c.stage_tol > 0.0)) {
            errs.push_back("identify: tol and stage_tol must be > 0");
        }
    }

    // control
    {
        if (s.task == Task::control && !root.has("control")) {
            errs.push_back("control required" + why);
        }
        Block b               = root.child("control");
        PenaltyConfig& p      = s.penalty;
        ControlSolverConfig& c = s.control_config;
        p.alpha0              = b.number("alpha0", p.alpha0);
        p.alpha1              = b.number("alpha1", p.alpha1);
        p.alpha2              = b.number("alpha2", p.alpha2);
        p.Lhat = s.task == Task::control && b.present() ? b.required_number("Lhat", why) : b.number("Lhat", p.Lhat);
        p.eps_schedule        = b.numbers("eps_schedule", p.eps_schedule);
        {
            Block a  = b.child("anchor");
            p.anchor = ControlPair{a.number("lA", p.anchor.lA), a.number("lI", p.anchor.lI)};
            a.finish();
        }
        c.theta              = b.number("theta", c.theta);
        c.tol_fp             = b.number("tol_fp", c.tol_fp);
        c.max_iters          = static_cast<int>(b.integer("max_iters", c.max_iters, 1));
        c.max_backtracks     = static_cast<int>(b.integer("max_backtracks", c.max_backtracks, 1));
        c.oscillation_window = static_cast<int>(b.integer("oscillation_window", c.oscillation_window, 1));
        c.stall_fp_tol       = b.number("stall_fp_tol", c.stall_fp_tol);
        c.violation_tol      = b.number("violation_tol", c.violation_tol);
        c.residual_tol       = b.number("residual_tol", c.residual_tol);
        c.refine_iters       = static_cast<int>(b.integer("refine_iters", c.refine_iters, 0));
        c.refine_tol         = b.number("refine_tol", c.refine_tol);
        s.multistart         = b.boolean("multistart", s.multistart);
        b.finish();
        if (s.task == Task::control) {
            for (auto& e : check_penalty_config(p, s.x0[comp::L])) {
                errs.push_back(e);
            }
        }
        if (!(c.theta > 0.0 && c.theta <= 1.0)) {
            errs.push_back("control.theta must lie in (0, 1]");
        }
    }

    // stability
    {
        Block b              = root.child("stability");
        ExtinctionConfig& e  = s.extinction;
        e.horizon            = b.number("horizon", e.horizon);
        e.h                  = b.number("h", e.h);
        e.tol                = b.number("tol", e.tol);
        e.horizon_cap        = b.number("horizon_cap", e.horizon_cap);
        e.critical_band      = b.number("critical_band", e.critical_band);
        s.tloc_C             = b.number("C", s.tloc_C);
        b.finish();
        if (!(e.horizon > 0.0) || !(e.h > 0.0) || !(e.tol > 0.0) || !(e.horizon_cap >= e.horizon)) {
            errs.push_back("stability: horizon, h, tol must be > 0 and horizon_cap >= horizon");
        }
        if (s.task == Task::stability && s.params.xi.sup_norm() != 0.0) {
            errs.push_back("params.xi must be 0 for task=stability");
        }
    }

    // synth
    {
        if (s.task == Task::synth && !root.has("synth")) {
            errs.push_back("synth required" + why);
        }
        Block b = root.child("synth");
        if (b.present()) {
            SynthSpec sp;
            if (!b.has("beta_I")) {
                errs.push_back("synth.beta_I required");
            }
            if (auto t = b.table("beta_I", CoefficientTable(0.0))) {
                sp.beta_I = *t;
            }
            sp.A0    = b.required_number("A0", "");
            sp.I0    = b.required_number("I0", "");
            sp.noise = b.number("noise", 0.0);
            sp.seed  = s.seed;
            if (!(sp.noise >= 0.0)) {
                errs.push_back("synth.noise must be >= 0");
            }
            const double room = s.params.N - s.x0[comp::L] - s.x0[comp::R];
            if (!(sp.A0 >= 0.0 && sp.I0 >= 0.0 && sp.A0 + sp.I0 <= room)) {
                errs.push_back("synth: A0, I0 must be >= 0 with A0 + I0 <= N - L0 - R0");
            }
            if (!covers_grid(sp.beta_I, s.grid.t0, s.grid.T)) {
                errs.push_back("synth.beta_I does not cover the grid");
            }
            s.synth = sp;
        }
        b.finish();
    }
    root.finish();

    if (!errs.empty()) {
        throw ScenarioError(std::move(errs));
    }
    if (s.task == Task::identify && !s.observations) {
        s.observations = synth_observations(s.params, s.x0, s.grid, *s.synth).observations;
    }
    return s;
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError({"cannot open scenario " + path});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), overrides, path);
}

std::string scenario_to_json(const Scenario& s)
{
    ordered_json j;
    j["name"]        = s.name;
    j["description"] = s.description;
    j["task"]        = to_string(s.task);
    j["seed"]        = s.seed;

    const ModelParams& p = s.params;
    ordered_json params;
    params["sigma"]  = p.sigma;
    params["mu_A"]   = p.mu_A;
    params["mu_I"]   = p.mu_I;
    params["mu_L"]   = p.mu_L;
    params["l_A"]    = p.l_A;
    params["l_I"]    = p.l_I;
    params["beta_I"] = table_ordered(p.beta_I);
    params["beta_A"] = table_ordered(p.beta_A);
    params["xi"]     = table_ordered(p.xi);
    j["params"]      = params;

    j["initial_state"] = ordered_json{{"S", s.x0[0]}, {"A", s.x0[1]}, {"I", s.x0[2]}, {"L", s.x0[3]}, {"R", s.x0[4]}};
    j["grid"]          = ordered_json{{"t0", s.grid.t0}, {"T", s.grid.T}, {"M", s.grid.M}};
    if (s.observations) {
        const Observations& o = *s.observations;
        j["observations"] = ordered_json{{"L0", o.L0}, {"R0", o.R0}, {"LT", o.LT}, {"RT", o.RT}, {"T", o.T}};
    }

    const IdentConfig& ic = s.ident_config;
    ordered_json ident;
    ident["alpha0"]             = s.ident_weights.alpha0;
    ident["alpha1"]             = s.ident_weights.alpha1;
    ident["M"]                  = ic.M;
    ident["beta_init"]          = ic.beta_init;
    ident["tol"]                = ic.tol;
    ident["max_iters"]          = ic.max_iters;
    ident["max_backtracks"]     = ic.max_backtracks;
    ident["gradient_iters"]     = ic.gradient_iters;
    ident["krylov_dim"]         = ic.krylov_dim;
    ident["continuation_start"] = ic.continuation_start;
    ident["stage_tol"]          = ic.stage_tol;
    j["identify"]               = ident;

    const PenaltyConfig& pc       = s.penalty;
    const ControlSolverConfig& cc = s.control_config;
    ordered_json control;
    control["alpha0"]             = pc.alpha0;
    control["alpha1"]             = pc.alpha1;
    control["alpha2"]             = pc.alpha2;
    control["Lhat"]               = pc.Lhat;
    control["eps_schedule"]       = pc.eps_schedule;
    control["anchor"]             = ordered_json{{"lA", pc.anchor.lA}, {"lI", pc.anchor.lI}};
    control["theta"]              = cc.theta;
    control["tol_fp"]             = cc.tol_fp;
    control["max_iters"]          = cc.max_iters;
    control["max_backtracks"]     = cc.max_backtracks;
    control["oscillation_window"] = cc.oscillation_window;
    control["stall_fp_tol"]       = cc.stall_fp_tol;
    control["violation_tol"]      = cc.violation_tol;
    control["residual_tol"]       = cc.residual_tol;
    control["refine_iters"]       = cc.refine_iters;
    control["refine_tol"]         = cc.refine_tol;
    control["multistart"]         = s.multistart;
    j["control"]                  = control;

    const ExtinctionConfig& e = s.extinction;
    j["stability"] = ordered_json{{"horizon", e.horizon},           {"h", e.h},
                                  {"tol", e.tol},                   {"horizon_cap", e.horizon_cap},
                                  {"critical_band", e.critical_band}, {"C", s.tloc_C}};
    if (s.synth) {
        j["synth"] = ordered_json{
            {"beta_I", table_ordered(s.synth->beta_I)}, {"A0", s.synth->A0}, {"I0", s.synth->I0},
            {"noise", s.synth->noise}};
    }
    return j.dump(2) + "\n";
}

Scenario default_scenario(Task task)
{
    Scenario s;
    s.name        = "default-" + to_string(task);
    s.description = "defaults for task " + to_string(task);
    s.task        = task;
    ModelParams& p = s.params;
    p.sigma        = 0.2;
    p.mu_A         = 0.1;
    p.mu_I         = 0.1;
    p.mu_L         = 0.05;
    p.l_A          = 0.1;
    p.l_I          = 0.3;
    p.beta_I       = CoefficientTable(0.4);
    p.beta_A       = CoefficientTable(0.3);
    p.xi           = CoefficientTable(0.0);
    p.N            = 1.0;
    s.x0           = make_state(0.9, 0.04, 0.03, 0.01, 0.02);
    s.grid         = Grid(0.0, 30.0, 10000);
    if (task == Task::identify) {
        SynthSpec sp;
        sp.beta_I      = CoefficientTable(0.4);
        sp.A0          = 0.05;
        sp.I0          = 0.03;
        const Grid g(0.0, 10.0, 10000);
        s.observations = synth_observations(p, s.x0, g, sp).observations;
    }
    if (task == Task::control) {
        s.penalty.Lhat = 1.0;
    }
    if (task == Task::synth) {
        s.synth = SynthSpec{CoefficientTable(0.4), 0.05, 0.03, 0.0, 0};
    }
    return s;
}

double unit_uniform(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

SynthOutput synth_observations(const ModelParams& params, const Vector5& x0, const Grid& grid, const SynthSpec& spec)
{
    using namespace comp;
    ModelParams p = params;
    p.beta_I      = spec.beta_I;
    const double S0 = p.N - x0[L] - x0[R] - spec.A0 - spec.I0;
    if (spec.A0 < 0.0 || spec.I0 < 0.0 || S0 < 0.0) {
        throw ValidationError({"synth: A0, I0 must be >= 0 with A0 + I0 <= N - L0 - R0"});
    }
    SynthOutput out;
    out.reference     = simulate(p, make_state(S0, spec.A0, spec.I0, x0[L], x0[R]), grid);
    const Vector5& XT = out.reference.back();
    out.observations  = Observations{x0[L], x0[R], XT[L], XT[R], grid.T - grid.t0};
    if (spec.noise > 0.0) {
        std::mt19937_64 rng(spec.seed);
        auto draw = [&] { return spec.noise * (2.0 * unit_uniform(rng()) - 1.0); };
        out.observations.LT = std::max(0.0, out.observations.LT + draw());
        out.observations.RT = std::max(0.0, out.observations.RT + draw());
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj) { return path_csv(traj, "t,S,A,I,L,R"); }

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out = open_out(path);
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj)
{
    write_text_file(path, trajectory_csv(traj));
}

void write_adjoint_csv(const std::string& path, const AdjointTrajectory& adj)
{
    write_text_file(path, path_csv(adj, "t,p,q,d,e,f"));
}

void write_series_csv(const std::string& path, const Grid& grid, const std::vector<double>& values,
                      const std::string& name)
{
    if (values.size() != grid.size()) {
        throw DomainError("write_series_csv: value count does not match grid");
    }
    std::string s = "t," + name + "\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        s += format17(grid.time(k)) + "," + format17(values[k]) + "\n";
    }
    write_text_file(path, s);
}

std::vector<std::array<double, 6>> read_trajectory_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    std::getline(in, line);
    if (line != "t,S,A,I,L,R") {
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
    }
    std::vector<std::array<double, 6>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::array<double, 6> row{};
        const char* p = line.c_str();
        for (int c = 0; c < 6; ++c) {
            char* end = nullptr;
            row[c]    = std::strtod(p, &end);
            if (end == p || (c < 5 && *end != ',') || (c == 5 && *end != '\0')) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
            }
            p = end + 1;
        }
        rows.push_back(row);
    }
    return rows;
}

// ---- summaries ------------------------------------------------------------

namespace {

ordered_json runtime_json(const RuntimeCounters& c)
{
    return ordered_json{{"forward_solves", c.forward_solves},
                        {"adjoint_solves", c.adjoint_solves},
                        {"iterations", c.iterations},
                        {"steps", c.steps}};
}

// R0 and S_bar of params with time-varying tables averaged over [t0, T].
std::pair<double, double> threshold_pair(const ModelParams& params, double t0, double T)
{
    const ModelParams avg = averaged_params(params, t0, T);
    return {r0(avg), s_threshold(avg)};
}

ordered_json skeleton(const Scenario& s)
{
    ordered_json j;
    j["task"]                 = to_string(s.task);
    j["cost"]                 = nullptr;
    j["cost_history"]         = ordered_json::array();
    j["residuals"]            = ordered_json::object();
    j["R0"]                   = nullptr;
    j["S_bar"]                = nullptr;
    j["constraint_violation"] = nullptr;
    j["seed"]                 = s.seed;
    j["runtime"]              = nullptr;
    return j;
}

// Inserts `key` right after "residuals" so the documented key order holds.
ordered_json with_solution(const ordered_json& base, const char* key, const ordered_json& value)
{
    ordered_json out;
    for (auto it = base.begin(); it != base.end(); ++it) {
        out[it.key()] = it.value();
        if (it.key() == "residuals") {
            out[key] = value;
        }
    }
    return out;
}

ordered_json stage_json(const StageRecord& r)
{
    return ordered_json{{"eps", r.eps},
                        {"controls", ordered_json{{"lA", r.controls.lA}, {"lI", r.controls.lI}}},
                        {"cost_eps", r.cost_eps},
                        {"violation", r.violation},
                        {"penalty_integral", r.penalty_integral},
                        {"fp_residual", r.fp_residual},
                        {"iterations", r.iterations},
                        {"gradient_fallback", r.gradient_fallback},
                        {"converged", r.converged}};
}

} // namespace

std::string summary_simulate(const Scenario& s, const Trajectory& traj)
{
    ordered_json j = skeleton(s);
    const auto [R0, Sb] = threshold_pair(s.params, s.grid.t0, s.grid.T);
    j["R0"]             = R0;
    j["S_bar"]          = Sb;
    double drift        = 0.0;
    double min_comp     = 0.0;
    for (const auto& x : traj.values) {
        drift    = std::max(drift, std::abs(total_population(x) - s.params.N));
        min_comp = std::min(min_comp, x.minCoeff());
    }
    j["residuals"] = ordered_json{{"conservation", drift}, {"min_component", min_comp}};
    RuntimeCounters rc;
    rc.forward_solves = 1;
    rc.steps          = static_cast<long>(s.grid.M);
    j["runtime"]      = runtime_json(rc);
    const Vector5& XT = traj.back();
    j["final_state"]  = ordered_json{{"S", XT[0]}, {"A", XT[1]}, {"I", XT[2]}, {"L", XT[3]}, {"R", XT[4]}};
    j["name"]         = s.name;
    return j.dump(2) + "\n";
}

std::string summary_identify(const Scenario& s, const IdentResult& r)
{
    ordered_json j     = skeleton(s);
    j["cost"]          = r.cost;
    j["cost_history"]  = r.cost_history;
    j["residuals"]     = ordered_json{{"optimality_residual", r.optimality_residual}, {"mismatch", r.mismatch}};
    const double T     = s.observations->T;
    const auto& beta   = r.candidate.beta_I;
    const double N0    = s.params.N - s.observations->L0 - s.observations->R0;
    ordered_json cand;
    cand["A0"]         = r.candidate.A0;
    cand["I0"]         = r.candidate.I0;
    cand["S0"]         = r.candidate.S0(N0);
    cand["beta_I"]     = ordered_json{{"mean", beta.mean(0.0, T)},
                                      {"min", *std::min_element(beta.values().begin(), beta.values().end())},
                                      {"max", beta.sup_norm()}};
    j                  = with_solution(j, "candidate", cand);
    ModelParams p      = s.params;
    p.beta_I           = beta;
    const auto [R0, Sb] = threshold_pair(p, 0.0, T);
    j["R0"]            = R0;
    j["S_bar"]         = Sb;
    RuntimeCounters rc;
    rc.forward_solves = r.forward_solves;
    rc.adjoint_solves = r.adjoint_solves;
    rc.iterations     = r.iterations;
    rc.steps          = static_cast<long>(s.ident_config.M);
    j["runtime"]      = runtime_json(rc);
    j["converged"]    = r.converged;
    j["status"]       = r.status;
    j["gradient_steps"] = r.gradient_steps;
    j["newton_steps"] = r.newton_steps;
    j["name"]         = s.name;
    return j.dump(2) + "\n";
}

std::string summary_control(const Scenario& s, const ControlResult& r, const MultistartResult* ms,
                            const std::optional<TLoc>& tloc)
{
    ordered_json j    = skeleton(s);
    j["cost"]         = r.cost;
    j["cost_history"] = r.cost_history;
    const double fp   = r.per_eps_history.empty() ? 0.0 : r.per_eps_history.back().fp_residual;
    j["residuals"]    = ordered_json{{"limit_residual", r.limit_residual}, {"last_stage_fp_residual", fp}};
    j                 = with_solution(j, "controls", ordered_json{{"lA", r.controls.lA}, {"lI", r.controls.lI}});
    const auto [R0, Sb] = threshold_pair(s.params.with_controls(r.controls.lA, r.controls.lI), s.grid.t0, s.grid.T);
    j["R0"]           = R0;
    j["S_bar"]        = Sb;
    j["constraint_violation"] = r.constraint_violation;
    RuntimeCounters rc;
    rc.forward_solves = r.counters.forward_solves;
    rc.adjoint_solves = r.counters.adjoint_solves;
    rc.iterations     = r.counters.iterations;
    rc.steps          = static_cast<long>(s.grid.M);
    if (ms != nullptr) {
        rc = RuntimeCounters{0, 0, 0, static_cast<long>(s.grid.M)};
        for (const auto& run : ms->runs) {
            rc.forward_solves += run.counters.forward_solves;
            rc.adjoint_solves += run.counters.adjoint_solves;
            rc.iterations += run.counters.iterations;
        }
    }
    j["runtime"]   = runtime_json(rc);
    j["converged"] = r.converged;
    j["status"]    = r.status;
    double nu_max  = 0.0;
    for (double v : r.multiplier_diag) {
        nu_max = std::max(nu_max, v);
    }
    j["multiplier_max"] = nu_max;
    ordered_json stages = ordered_json::array();
    for (const auto& st : r.per_eps_history) {
        stages.push_back(stage_json(st));
    }
    j["per_eps_history"] = stages;
    j["refine_steps"]    = r.refine_steps;
    j["warnings"]        = r.warnings;
    if (ms != nullptr) {
        ordered_json runs = ordered_json::array();
        for (std::size_t k = 0; k < ms->runs.size(); ++k) {
            const auto& run = ms->runs[k];
            runs.push_back(ordered_json{{"start", ordered_json{{"lA", ms->starts[k].lA}, {"lI", ms->starts[k].lI}}},
                                        {"controls", ordered_json{{"lA", run.controls.lA}, {"lI", run.controls.lI}}},
                                        {"cost", run.cost},
                                        {"converged", run.converged}});
        }
        j["multistart"] = ordered_json{{"best", ms->best}, {"disagreement", ms->disagreement}, {"runs", runs}};
    }
    if (tloc) {
        j["T_loc"] = ordered_json{{"T1", tloc->T1}, {"T2", tloc->T2}, {"T_loc", tloc->T_loc}};
    }
    j["name"] = s.name;
    return j.dump(2) + "\n";
}

std::string summary_stability(const Scenario& s, const StabilityReport& r)
{
    ordered_json j = skeleton(s);
    j["residuals"] = ordered_json{{"conservation", r.conservation_error},
                                  {"infected_final", r.final_state[1] + r.final_state[2] + r.final_state[3]}};
    j["R0"]        = r.R0;
    j["S_bar"]     = r.S_bar;
    RuntimeCounters rc;
    rc.forward_solves = 1;
    rc.steps          = r.steps;
    j["runtime"]      = runtime_json(rc);
    ordered_json eig  = ordered_json::array();
    for (const auto& z : r.at_limit.eigenvalues) {
        eig.push_back(ordered_json{{"re", z.real()}, {"im", z.imag()}});
    }
    j["S_tilde_inf"]     = r.S_tilde_inf;
    j["extinction"]      = r.extinction;
    j["below_threshold"] = r.below_threshold;
    j["S_monotone"]      = r.S_monotone;
    j["hurwitz"]         = r.at_limit.hurwitz;
    j["marginal"]        = r.at_limit.marginal;
    j["eigenvalues"]     = eig;
    j["regime"]          = to_string(r.regime);
    j["final_time"]      = r.final_time;
    j["name"]            = s.name;
    return j.dump(2) + "\n";
}

std::string summary_synth(const Scenario& s, const SynthOutput& out)
{
    ordered_json j = skeleton(s);
    const SynthSpec& sp = *s.synth;
    ordered_json cand;
    cand["A0"]     = sp.A0;
    cand["I0"]     = sp.I0;
    cand["beta_I"] = table_ordered(sp.beta_I);
    j              = with_solution(j, "candidate", cand);
    ModelParams p  = s.params;
    p.beta_I       = sp.beta_I;
    const auto [R0, Sb] = threshold_pair(p, s.grid.t0, s.grid.T);
    j["R0"]        = R0;
    j["S_bar"]     = Sb;
    RuntimeCounters rc;
    rc.forward_solves = 1;
    rc.steps          = static_cast<long>(s.grid.M);
    j["runtime"]      = runtime_json(rc);
    const Observations& o = out.observations;
    j["observations"] = ordered_json{{"L0", o.L0}, {"R0", o.R0}, {"LT", o.LT}, {"RT", o.RT}, {"T", o.T}};
    j["noise"]        = sp.noise;
    j["name"]         = s.name;
    return j.dump(2) + "\n";
}

} // namespace sailr
