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

#include "sailr/control.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace sailr {

namespace {

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

ControlPair project(const ControlPair& c) { return {clamp_unit(c.lA), clamp_unit(c.lI)}; }

double distance(const ControlPair& a, const ControlPair& b) { return std::hypot(a.lA - b.lA, a.lI - b.lI); }

double max_change(const ControlPair& a, const ControlPair& b)
{
    return std::max(std::abs(a.lA - b.lA), std::abs(a.lI - b.lI));
}

// (int A (q - e), int I (q - d)).
std::array<double, 2> switching_integrals(const Trajectory& traj, const AdjointTrajectory& adj)
{
    using namespace comp;
    if (!(traj.grid == adj.grid)) {
        throw DomainError("control: trajectory and adjoint grids differ");
    }
    const Grid& g = traj.grid;
    return {trapezoid(g, [&](std::size_t k) { return traj[k][A] * (adj[k][dual::q] - adj[k][dual::e]); }),
            trapezoid(g, [&](std::size_t k) { return traj[k][I] * (adj[k][dual::d] - adj[k][dual::e]); })};
}

// Forward and dual solves of the penalized problem at fixed controls.
struct Evaluation {
    ControlPair ctrl;
    Trajectory traj;
    AdjointTrajectory adj;
    double cost = 0.0;
};

class Evaluator {
public:
    Evaluator(const PenaltyConfig& pcfg, double eps, const ModelParams& params, const Vector5& x0, const Grid& grid,
              SolveCounters& counters)
        : pcfg_(pcfg), eps_(eps), params_(params), x0_(x0), grid_(grid), counters_(counters)
    {
    }

    Trajectory forward(const ControlPair& c) const
    {
        ++counters_.forward_solves;
        return simulate(params_.with_controls(c.lA, c.lI), x0_, grid_);
    }

    double cost(const ControlPair& c, const ControlPair& anchor) const
    {
        PenaltyConfig p = pcfg_;
        p.anchor        = anchor;
        return cost_p_eps(c, forward(c), p, eps_);
    }

    Evaluation eval(const ControlPair& c, const ControlPair& anchor) const
    {
        Evaluation ev{c, forward(c), {}, 0.0};
        ev.adj = adjoint_p_eps(ev.traj, params_.with_controls(c.lA, c.lI), penalty_terms(pcfg_, eps_));
        ++counters_.adjoint_solves;
        PenaltyConfig p = pcfg_;
        p.anchor        = anchor;
        ev.cost         = cost_p_eps(c, ev.traj, p, eps_);
        return ev;
    }

private:
    const PenaltyConfig& pcfg_;
    double eps_;
    const ModelParams& params_;
    const Vector5& x0_;
    const Grid& grid_;
    SolveCounters& counters_;
};

// Armijo search on the projection arc P(l - s g); returns false when no
// admissible step is found.
bool projected_gradient_step(const Evaluator& ev, Evaluation& cur, const ControlPair& anchor, double alpha1,
                             double s, int max_backtracks)
{
    const std::array<double, 2> g = gradient_p_eps(cur.ctrl, cur.traj, cur.adj, alpha1, anchor);
    for (int bt = 0; bt < max_backtracks; ++bt) {
        const ControlPair trial = project({cur.ctrl.lA - s * g[0], cur.ctrl.lI - s * g[1]});
        const double decrease   = g[0] * (trial.lA - cur.ctrl.lA) + g[1] * (trial.lI - cur.ctrl.lI);
        if (!(decrease < 0.0)) {
            return false;
        }
        if (ev.cost(trial, anchor) <= cur.cost + 1e-4 * decrease) {
            cur = ev.eval(trial, anchor);
            return true;
        }
        s *= 0.5;
    }
    return false;
}

} // namespace

std::vector<std::string> check_controls(const ControlPair& c)
{
    std::vector<std::string> errs;
    if (!(c.lA >= 0.0 && c.lA <= 1.0)) {
        errs.push_back("lA out of [0,1]");
    }
    if (!(c.lI >= 0.0 && c.lI <= 1.0)) {
        errs.push_back("lI out of [0,1]");
    }
    return errs;
}

std::vector<double> default_eps_schedule()
{
    std::vector<double> eps;
    for (int k = 0; k <= 12; ++k) {
        eps.push_back(0.1 * std::ldexp(1.0, -k));
    }
    return eps;
}

std::vector<std::string> check_penalty_config(const PenaltyConfig& pcfg, double L0)
{
    std::vector<std::string> errs;
    if (pcfg.eps_schedule.empty()) {
        errs.push_back("eps_schedule is empty");
    }
    for (std::size_t k = 0; k < pcfg.eps_schedule.size(); ++k) {
        const double e = pcfg.eps_schedule[k];
        if (!std::isfinite(e) || !(e > 0.0)) {
            errs.push_back("eps_schedule[" + std::to_string(k) + "] must be > 0");
        }
        else if (k > 0 && !(e < pcfg.eps_schedule[k - 1])) {
            errs.push_back("eps_schedule must be strictly decreasing");
        }
    }
    if (!std::isfinite(pcfg.alpha0) || pcfg.alpha0 < 0.0) {
        errs.push_back("alpha0 must be >= 0");
    }
    if (!std::isfinite(pcfg.alpha1) || !(pcfg.alpha1 > 0.0)) {
        errs.push_back("alpha1 must be > 0");
    }
    if (!std::isfinite(pcfg.alpha2) || pcfg.alpha2 < 0.0) {
        errs.push_back("alpha2 must be >= 0");
    }
    if (!std::isfinite(pcfg.Lhat) || !(pcfg.Lhat > L0)) {
        errs.push_back("Lhat must exceed L0");
    }
    for (const auto& e : check_controls(pcfg.anchor)) {
        errs.push_back("anchor: " + e);
    }
    return errs;
}

double cost_p(const ControlPair& ctrl, const Trajectory& traj, double alpha0, double alpha1)
{
    using namespace comp;
    const double state = trapezoid(traj.grid, [&](std::size_t k) {
        return traj[k][A] * traj[k][A] + traj[k][I] * traj[k][I];
    });
    return 0.5 * alpha0 * state + 0.5 * alpha1 * (ctrl.lA * ctrl.lA + ctrl.lI * ctrl.lI);
}

double cost_p(const ControlPair& ctrl, const ModelParams& params, const Vector5& x0, const Grid& grid, double alpha0,
              double alpha1)
{
    return cost_p(ctrl, simulate(params.with_controls(ctrl.lA, ctrl.lI), x0, grid), alpha0, alpha1);
}

double penalty_integral(const Trajectory& traj, double Lhat)
{
    return trapezoid(traj.grid, [&](std::size_t k) {
        const double v = std::max(0.0, traj[k][comp::L] - Lhat);
        return v * v;
    });
}

double cost_p_eps(const ControlPair& ctrl, const Trajectory& traj, const PenaltyConfig& pcfg, double eps)
{
    if (!(eps > 0.0)) {
        throw DomainError("cost_p_eps: eps must be > 0");
    }
    const double dA = ctrl.lA - pcfg.anchor.lA;
    const double dI = ctrl.lI - pcfg.anchor.lI;
    return cost_p(ctrl, traj, pcfg.alpha0, pcfg.alpha1) + pcfg.alpha2 / (2.0 * eps) * penalty_integral(traj, pcfg.Lhat) +
           0.5 * (dA * dA + dI * dI);
}

double cost_p_eps(const ControlPair& ctrl, const ModelParams& params, const Vector5& x0, const Grid& grid,
                  const PenaltyConfig& pcfg, double eps)
{
    return cost_p_eps(ctrl, simulate(params.with_controls(ctrl.lA, ctrl.lI), x0, grid), pcfg, eps);
}

std::array<double, 2> gradient_p_eps(const ControlPair& ctrl, const Trajectory& traj, const AdjointTrajectory& adj,
                                     double alpha1, const ControlPair& anchor)
{
    const auto s = switching_integrals(traj, adj);
    return {-s[0] + (alpha1 + 1.0) * ctrl.lA - anchor.lA, -s[1] + (alpha1 + 1.0) * ctrl.lI - anchor.lI};
}

ControlPair update_controls_eps(const Trajectory& traj, const AdjointTrajectory& adj, double alpha1,
                                const ControlPair& anchor)
{
    const auto s = switching_integrals(traj, adj);
    return project({(s[0] + anchor.lA) / (alpha1 + 1.0), (s[1] + anchor.lI) / (alpha1 + 1.0)});
}

ControlPair limit_update(const Trajectory& traj, const AdjointTrajectory& adj, double alpha1)
{
    if (!(alpha1 > 0.0)) {
        throw DomainError("limit_update: alpha1 must be > 0");
    }
    const auto s = switching_integrals(traj, adj);
    return project({s[0] / alpha1, s[1] / alpha1});
}

double limit_residual(const ControlPair& ctrl, const Trajectory& traj, const AdjointTrajectory& adj, double alpha1)
{
    return max_change(ctrl, limit_update(traj, adj, alpha1));
}

double constraint_violation(const Trajectory& traj, double Lhat)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double L = traj[k][comp::L];
        if (L < -tol_neg) {
            std::ostringstream os;
            os << "constraint_violation: L = " << L << " < 0 at step " << k;
            throw DomainError(os.str());
        }
        worst = std::max(worst, L - Lhat);
    }
    return worst;
}

std::vector<double> multiplier_diagnostic(const Trajectory& traj, double alpha2, double eps, double Lhat)
{
    std::vector<double> nu(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        nu[k] = alpha2 / eps * std::max(0.0, traj[k][comp::L] - Lhat);
    }
    return nu;
}

PenaltyTerms penalty_terms(const PenaltyConfig& pcfg, double eps)
{
    return PenaltyTerms{pcfg.alpha0, pcfg.alpha2, eps, pcfg.Lhat};
}

StageResult solve_p_eps(const PenaltyConfig& pcfg, double eps, const ModelParams& params, const Vector5& x0,
                        const Grid& grid, const ControlPair& init, const ControlSolverConfig& cfg)
{
    if (!(eps > 0.0)) {
        throw DomainError("solve_p_eps: eps must be > 0");
    }
    if (auto errs = check_controls(init); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    StageResult out;
    out.eps    = eps;
    out.anchor = pcfg.anchor;
    const Evaluator ev(pcfg, eps, params, x0, grid, out.counters);
    const double a1 = pcfg.alpha1;

    Evaluation cur = ev.eval(init, pcfg.anchor);
    Evaluation best = cur;
    out.cost_history.push_back(cur.cost);
    int increases  = 0;
    int since_best = 0;

    auto finish = [&](Evaluation& e, bool converged) {
        out.controls    = e.ctrl;
        out.cost_eps    = e.cost;
        out.fp_residual = max_change(e.ctrl, update_controls_eps(e.traj, e.adj, a1, pcfg.anchor));
        out.trajectory  = std::move(e.traj);
        out.adjoint     = std::move(e.adj);
        out.converged   = converged;
    };

    for (int it = 0; it < cfg.max_iters; ++it) {
        ++out.iterations;
        ++out.counters.iterations;
        const ControlPair target = update_controls_eps(cur.traj, cur.adj, a1, pcfg.anchor);
        if (max_change(target, cur.ctrl) <= cfg.tol_fp) {
            finish(cur, true);
            return out;
        }
        if (!out.gradient_fallback) {
            const ControlPair next{cfg.theta * target.lA + (1.0 - cfg.theta) * cur.ctrl.lA,
                                   cfg.theta * target.lI + (1.0 - cfg.theta) * cur.ctrl.lI};
            Evaluation trial = ev.eval(next, pcfg.anchor);
            increases        = trial.cost > cur.cost ? increases + 1 : 0;
            since_best       = trial.cost < best.cost ? 0 : since_best + 1;
            cur              = std::move(trial);
            // consecutive increases, or a cycle without a new best
            if (increases >= cfg.oscillation_window || since_best >= 2 * cfg.oscillation_window) {
                out.gradient_fallback = true;
                if (best.cost < cur.cost) {
                    cur = best;
                }
            }
        }
        else if (!projected_gradient_step(ev, cur, pcfg.anchor, a1, 1.0 / (a1 + 1.0), cfg.max_backtracks)) {
            // no Armijo step: accept when stationary to discretization level
            finish(cur, max_change(cur.ctrl, update_controls_eps(cur.traj, cur.adj, a1, pcfg.anchor)) <=
                            cfg.stall_fp_tol);
            if (out.converged) {
                return out;
            }
            throw StallError<StageResult>("control stage stalled: line search failed", std::move(out));
        }
        out.cost_history.push_back(cur.cost);
        if (cur.cost < best.cost) {
            best = cur;
        }
    }
    finish(best, false);
    throw StallError<StageResult>("control stage reached max_iters", std::move(out));
}

namespace {

// Projected Newton on the anchor-free J_eps over [0,1]^2, Hessian by
// differences of adjoint gradients. Stops on the limit residual.
int refine_anchor_free(const Evaluator& ev, Evaluation& cur, const ControlSolverConfig& cfg, double alpha1)
{
    const ControlPair none{};
    auto grad = [&](const Evaluation& e) {
        const auto s = switching_integrals(e.traj, e.adj);
        return Eigen::Vector2d(-s[0] + alpha1 * e.ctrl.lA, -s[1] + alpha1 * e.ctrl.lI);
    };
    auto anchor_free_cost = [&](const Evaluation& e) {
        return e.cost - 0.5 * (e.ctrl.lA * e.ctrl.lA + e.ctrl.lI * e.ctrl.lI);
    };
    auto cost_at = [&](const ControlPair& c) {
        return ev.cost(c, none) - 0.5 * (c.lA * c.lA + c.lI * c.lI);
    };

    int steps = 0;
    for (; steps < cfg.refine_iters; ++steps) {
        if (limit_residual(cur.ctrl, cur.traj, cur.adj, alpha1) <= cfg.refine_tol) {
            break;
        }
        const Eigen::Vector2d g = grad(cur);
        const double x[2]       = {cur.ctrl.lA, cur.ctrl.lI};
        bool free[2];
        for (int i = 0; i < 2; ++i) {
            free[i] = !((x[i] <= 0.0 && g[i] > 0.0) || (x[i] >= 1.0 && g[i] < 0.0));
        }

        Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
        for (int i = 0; i < 2; ++i) {
            const double tau = x[i] + 1e-6 <= 1.0 ? 1e-6 : -1e-6;
            ControlPair c    = cur.ctrl;
            (i == 0 ? c.lA : c.lI) += tau;
            H.col(i) = (grad(ev.eval(c, none)) - g) / tau;
        }
        H = 0.5 * (H + H.transpose()).eval();

        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        if (free[0] && free[1]) {
            const auto ldlt = H.ldlt();
            if (ldlt.info() == Eigen::Success && ldlt.isPositive() && H.determinant() > 0.0) {
                d = -ldlt.solve(g);
            }
            else {
                d = -g / alpha1;
            }
        }
        for (int i = 0; i < 2; ++i) {
            if (free[i] && !(free[0] && free[1])) {
                d[i] = H(i, i) > 0.0 ? -g[i] / H(i, i) : -g[i] / alpha1;
            }
            if (!free[i]) {
                d[i] = -g[i] / alpha1;
            }
        }

        const double c0 = anchor_free_cost(cur);
        double s        = 1.0;
        bool moved      = false;
        for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
            const ControlPair trial = project({x[0] + s * d[0], x[1] + s * d[1]});
            const double decrease   = g[0] * (trial.lA - x[0]) + g[1] * (trial.lI - x[1]);
            if (!(decrease < 0.0)) {
                break;
            }
            if (cost_at(trial) <= c0 + 1e-4 * decrease) {
                cur   = ev.eval(trial, none);
                moved = true;
                break;
            }
            s *= 0.5;
        }
        if (!moved) {
            // Armijo is below rounding: accept the full step if it improves
            // the residual.
            Evaluation trial = ev.eval(project({x[0] + d[0], x[1] + d[1]}), none);
            if (limit_residual(trial.ctrl, trial.traj, trial.adj, alpha1) <
                limit_residual(cur.ctrl, cur.traj, cur.adj, alpha1)) {
                cur = std::move(trial);
            }
            else {
                break;
            }
        }
    }
    return steps;
}

} // namespace

ControlResult solve_p(const PenaltyConfig& pcfg, const ModelParams& params, const Vector5& x0, const Grid& grid,
                      const ControlSolverConfig& cfg)
{
    if (auto errs = check_penalty_config(pcfg, x0[comp::L]); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    validate_params(params);

    ControlResult res;
    ControlPair anchor = pcfg.anchor;
    ControlPair ctrl   = pcfg.anchor;
    double prev_pen    = std::numeric_limits<double>::infinity();
    StageResult last;
    for (const double eps : pcfg.eps_schedule) {
        PenaltyConfig stage = pcfg;
        stage.anchor        = anchor;
        StageResult st;
        try {
            st = solve_p_eps(stage, eps, params, x0, grid, ctrl, cfg);
        }
        catch (const StallError<StageResult>& e) {
            st = e.best();
            std::ostringstream os;
            os << "stage eps=" << eps << ": " << e.what();
            res.warnings.push_back(os.str());
        }
        res.counters.forward_solves += st.counters.forward_solves;
        res.counters.adjoint_solves += st.counters.adjoint_solves;
        res.counters.iterations += st.counters.iterations;
        res.cost_history.insert(res.cost_history.end(), st.cost_history.begin(), st.cost_history.end());

        StageRecord rec;
        rec.eps               = eps;
        rec.controls          = st.controls;
        rec.cost_eps          = st.cost_eps;
        rec.violation         = constraint_violation(st.trajectory, pcfg.Lhat);
        rec.penalty_integral  = penalty_integral(st.trajectory, pcfg.Lhat);
        rec.fp_residual       = st.fp_residual;
        rec.iterations        = st.iterations;
        rec.gradient_fallback = st.gradient_fallback;
        rec.converged         = st.converged;
        if (rec.penalty_integral > 1.1 * prev_pen) {
            std::ostringstream os;
            os << "penalty integral grew from " << prev_pen << " to " << rec.penalty_integral << " at eps=" << eps;
            res.warnings.push_back(os.str());
        }
        prev_pen = rec.penalty_integral;
        res.per_eps_history.push_back(rec);

        ctrl   = st.controls;
        anchor = st.controls;
        last   = std::move(st);
    }

    const double eps = pcfg.eps_schedule.back();
    SolveCounters refine_counters;
    const Evaluator ev(pcfg, eps, params, x0, grid, refine_counters);
    Evaluation cur{last.controls, std::move(last.trajectory), std::move(last.adjoint), 0.0};
    {
        PenaltyConfig free_cfg = pcfg;
        free_cfg.anchor        = ControlPair{};
        cur.cost               = cost_p_eps(cur.ctrl, cur.traj, free_cfg, eps);
    }
    res.refine_steps = refine_anchor_free(ev, cur, cfg, pcfg.alpha1);
    res.counters.forward_solves += refine_counters.forward_solves;
    res.counters.adjoint_solves += refine_counters.adjoint_solves;
    res.counters.iterations += res.refine_steps;

    res.controls             = cur.ctrl;
    res.cost                 = cost_p(cur.ctrl, cur.traj, pcfg.alpha0, pcfg.alpha1);
    res.constraint_violation = constraint_violation(cur.traj, pcfg.Lhat);
    res.limit_residual       = limit_residual(cur.ctrl, cur.traj, cur.adj, pcfg.alpha1);
    res.multiplier_diag      = multiplier_diagnostic(cur.traj, pcfg.alpha2, eps, pcfg.Lhat);
    res.trajectory           = std::move(cur.traj);
    res.adjoint              = std::move(cur.adj);

    const bool feasible = res.constraint_violation <= cfg.violation_tol;
    const bool optimal  = res.limit_residual <= cfg.residual_tol;
    res.converged       = feasible && optimal;
    if (res.converged) {
        res.status = "converged";
    }
    else if (!feasible) {
        res.status = "eps schedule exhausted with constraint violation above tolerance";
    }
    else {
        res.status = "fixed-point residual above tolerance";
    }
    return res;
}

MultistartResult solve_p_multistart(const PenaltyConfig& pcfg, const ModelParams& params, const Vector5& x0,
                                    const Grid& grid, const ControlSolverConfig& cfg, unsigned jobs)
{
    MultistartResult out;
    out.starts = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}};
    out.runs.resize(out.starts.size());
    std::vector<std::exception_ptr> errors(out.starts.size());

    auto run = [&](std::size_t k) {
        try {
            PenaltyConfig p = pcfg;
            p.anchor        = out.starts[k];
            out.runs[k]     = solve_p(p, params, x0, grid, cfg);
        }
        catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const std::size_t n = out.starts.size();
    jobs                = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (jobs == 1) {
        for (std::size_t k = 0; k < n; ++k) {
            run(k);
        }
    }
    else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < n; k += jobs) {
                    run(k);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    bool any_converged = false;
    for (const auto& r : out.runs) {
        any_converged = any_converged || r.converged;
    }
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& r = out.runs[k];
        if ((r.converged || !any_converged) && r.cost < best_cost) {
            best_cost = r.cost;
            out.best  = k;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (out.runs[i].converged && out.runs[j].converged) {
                out.disagreement = std::max(out.disagreement, distance(out.runs[i].controls, out.runs[j].controls));
            }
        }
    }
    return out;
}

} // namespace sailr
