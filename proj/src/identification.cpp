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

#include "sailr/identification.hpp"

#include "sailr/krylov.hpp"
#include "sailr/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sailr {

namespace {

constexpr double tie_tol = 1e-14;

double clamp01(double x, double hi) { return std::clamp(x, 0.0, hi); }

double k0_objective(const std::array<double, 2>& z, const std::array<double, 2>& y)
{
    return z[0] * z[0] + z[0] * z[1] + z[1] * z[1] - y[0] * z[0] - y[1] * z[1];
}

std::array<double, 2> pick_best(const std::vector<std::array<double, 2>>& candidates,
                                const std::array<double, 2>& y)
{
    std::array<double, 2> best = candidates.front();
    double best_val            = k0_objective(best, y);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const auto& z    = candidates[k];
        const double val = k0_objective(z, y);
        if (val < best_val - tie_tol) {
            best     = z;
            best_val = val;
        }
        else if (std::abs(val - best_val) <= tie_tol &&
                 (z[0] < best[0] || (z[0] == best[0] && z[1] < best[1]))) {
            best = z;
        }
    }
    return best;
}

bool in_k0(const std::array<double, 2>& z, double N0)
{
    return z[0] >= 0.0 && z[1] >= 0.0 && z[0] + z[1] <= N0;
}

// Iterate of the solver: a candidate with its forward and dual solutions.
struct Point {
    IdentCandidate cand;
    Trajectory traj;
    AdjointTrajectory adj;
    double cost = 0.0;
};

class Evaluator {
public:
    Evaluator(const IdentProblem& prob, IdentResult& counters) : prob_(prob), counters_(counters) {}

    IdentCandidate candidate(std::vector<double> beta, double A0, double I0) const
    {
        return IdentCandidate{CoefficientTable::on_uniform_grid(prob_.grid.t0, prob_.grid.T, std::move(beta)), A0,
                              I0};
    }

    Point eval(IdentCandidate c) const
    {
        Point pt{std::move(c), {}, {}, 0.0};
        const ModelParams params = prob_.params_for(pt.cand);
        pt.traj                  = simulate(params, prob_.initial_state(pt.cand), prob_.grid);
        ++counters_.forward_solves;
        pt.adj = adjoint_p0(pt.traj, params, prob_.obs);
        ++counters_.adjoint_solves;
        pt.cost = cost_p0(pt.cand, prob_, pt.traj);
        return pt;
    }

    /// Cost only; no dual solve. A trial point whose forward solve blows up
    /// has infinite cost.
    double cost(const IdentCandidate& c) const
    {
        ++counters_.forward_solves;
        try {
            const Trajectory traj = simulate(prob_.params_for(c), prob_.initial_state(c), prob_.grid);
            return cost_p0(c, prob_, traj);
        }
        catch (const IntegrationError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

private:
    const IdentProblem& prob_;
    IdentResult& counters_;
};

// Stacked fixed-point residual min(beta, gbeta/a1) and the resolvent part,
// in the unknown order (beta_0..beta_M, A0, I0).
Eigen::VectorXd residual_vector(const Point& pt, const IdentProblem& prob)
{
    using namespace comp;
    const Grid& g       = prob.grid;
    const std::size_t n = g.size();
    const auto& w       = prob.weights;
    const double N0     = prob.N0();
    Eigen::VectorXd F(n + 2);
    for (std::size_t k = 0; k < n; ++k) {
        const double beta = pt.cand.beta_I(g.time(k));
        const double psi  = (pt.adj[k][dual::p] - pt.adj[k][dual::q]) * pt.traj[k][S] * pt.traj[k][I];
        F[static_cast<Eigen::Index>(k)] =
            w.alpha1 > 0.0 ? beta - std::max(0.0, psi / w.alpha1) : std::min(beta, -psi);
    }
    const Vector5& y0 = pt.adj.front();
    const std::array<double, 2> a{pt.cand.A0, pt.cand.I0};
    std::array<double, 2> target;
    if (w.alpha0 > 0.0) {
        target = resolve_k0({(y0[dual::p] - y0[dual::q] + w.alpha0 * N0) / w.alpha0,
                             (y0[dual::p] - y0[dual::d] + w.alpha0 * N0) / w.alpha0},
                            N0);
    }
    else {
        const double gA = -(y0[dual::p] - y0[dual::q]);
        const double gI = -(y0[dual::p] - y0[dual::d]);
        target          = project_k0({a[0] - gA, a[1] - gI}, N0);
    }
    F[static_cast<Eigen::Index>(n)]     = a[0] - target[0];
    F[static_cast<Eigen::Index>(n + 1)] = a[1] - target[1];
    return F;
}

double certificate(const Eigen::VectorXd& F, std::size_t n)
{
    const double beta_part = F.head(static_cast<Eigen::Index>(n)).cwiseAbs().maxCoeff();
    const double k0_part   = F.tail(2).norm();
    return std::max(beta_part, k0_part);
}

} // namespace

Vector5 IdentProblem::initial_state(const IdentCandidate& c) const
{
    return make_state(c.S0(N0()), c.A0, c.I0, obs.L0, obs.R0);
}

ModelParams IdentProblem::params_for(const IdentCandidate& c) const
{
    ModelParams p = params;
    p.beta_I      = c.beta_I;
    return p;
}

IdentProblem make_ident_problem(const ModelParams& params, const Observations& obs, const IdentWeights& w,
                                std::size_t M)
{
    std::vector<std::string> errs = check_params(params);
    for (auto& e : check_observations(obs, params.N)) {
        errs.push_back(std::move(e));
    }
    if (!(w.alpha0 >= 0.0) || !(w.alpha1 >= 0.0)) {
        errs.push_back("identify weights must be >= 0");
    }
    if (!errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    return IdentProblem{params, obs, w, Grid(0.0, obs.T, M)};
}

std::vector<std::string> check_candidate(const IdentCandidate& c, const IdentProblem& prob)
{
    std::vector<std::string> errs;
    if (!c.beta_I.covers(prob.grid.t0, prob.grid.T)) {
        errs.push_back("candidate beta_I does not cover [0, T]");
    }
    const double N0 = prob.N0();
    if (!(c.A0 >= 0.0) || !(c.I0 >= 0.0)) {
        errs.push_back("candidate A0, I0 must be >= 0");
    }
    if (c.A0 + c.I0 > N0 * (1.0 + 1e-14)) {
        errs.push_back("candidate A0 + I0 exceeds N0");
    }
    return errs;
}

double cost_p0(const IdentCandidate& c, const IdentProblem& prob, const Trajectory& traj)
{
    using namespace comp;
    const Vector5& XT = traj.back();
    const double dL   = XT[L] - prob.obs.LT;
    const double dR   = XT[R] - prob.obs.RT;
    const auto& w     = prob.weights;
    const Grid& g     = traj.grid;
    const double N0   = prob.N0();

    double cost = 0.5 * (dL * dL + dR * dR);
    if (w.alpha1 != 0.0) {
        cost += 0.5 * w.alpha1 * trapezoid(g, [&](std::size_t k) {
                    const double b = c.beta_I(g.time(k));
                    return b * b;
                });
    }
    const double S0 = N0 - c.A0 - c.I0;
    cost += 0.5 * w.alpha0 * (c.A0 * c.A0 + c.I0 * c.I0 + S0 * S0);
    return cost;
}

double cost_p0(const IdentCandidate& c, const IdentProblem& prob)
{
    if (auto errs = check_candidate(c, prob); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    const Trajectory traj = simulate(prob.params_for(c), prob.initial_state(c), prob.grid);
    return cost_p0(c, prob, traj);
}

IdentGradient gradient_p0(const IdentCandidate& c, const IdentProblem& prob, const Trajectory& traj,
                          const AdjointTrajectory& adj)
{
    using namespace comp;
    const Grid& g   = traj.grid;
    const auto& w   = prob.weights;
    const double N0 = prob.N0();

    IdentGradient grad;
    grad.beta.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double psi = (adj[k][dual::p] - adj[k][dual::q]) * traj[k][S] * traj[k][I];
        grad.beta[k]     = w.alpha1 * c.beta_I(g.time(k)) - psi;
    }
    const Vector5& y0 = adj.front();
    grad.A0 = -(y0[dual::p] - y0[dual::q] - 2.0 * w.alpha0 * c.A0 + w.alpha0 * N0 - w.alpha0 * c.I0);
    grad.I0 = -(y0[dual::p] - y0[dual::d] - 2.0 * w.alpha0 * c.I0 + w.alpha0 * N0 - w.alpha0 * c.A0);
    return grad;
}

IdentGradient gradient_p0(const IdentCandidate& c, const IdentProblem& prob)
{
    if (auto errs = check_candidate(c, prob); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    const ModelParams params = prob.params_for(c);
    const Trajectory traj    = simulate(params, prob.initial_state(c), prob.grid);
    const AdjointTrajectory adj = adjoint_p0(traj, params, prob.obs);
    return gradient_p0(c, prob, traj, adj);
}

std::vector<double> project_kplus_grid(const std::vector<double>& g)
{
    std::vector<double> out(g.size());
    std::transform(g.begin(), g.end(), out.begin(), [](double v) { return std::max(0.0, v); });
    return out;
}

std::array<double, 2> resolve_k0(const std::array<double, 2>& y, double N0)
{
    if (!(N0 > 0.0)) {
        if (N0 == 0.0) {
            return {0.0, 0.0};
        }
        throw DomainError("resolve_k0: N0 must be > 0");
    }
    std::vector<std::array<double, 2>> cands;
    // stationary point of the unconstrained quadratic, Gamma^{-1} y
    const std::array<double, 2> z0{(2.0 * y[0] - y[1]) / 3.0, (2.0 * y[1] - y[0]) / 3.0};
    if (in_k0(z0, N0)) {
        cands.push_back(z0);
    }
    cands.push_back({0.0, clamp01(0.5 * y[1], N0)});
    cands.push_back({clamp01(0.5 * y[0], N0), 0.0});
    // edge A + I = N0: objective in A is A^2 - N0 A + const - (y1 - y2) A
    const double a_edge = clamp01(0.5 * (N0 + y[0] - y[1]), N0);
    cands.push_back({a_edge, N0 - a_edge});
    cands.push_back({0.0, 0.0});
    cands.push_back({N0, 0.0});
    cands.push_back({0.0, N0});
    return pick_best(cands, y);
}

std::array<double, 2> project_k0(const std::array<double, 2>& z, double N0)
{
    if (in_k0(z, N0)) {
        return z;
    }
    const double a_edge = clamp01(0.5 * (N0 + z[0] - z[1]), N0);
    const std::array<std::array<double, 2>, 3> pts{
        std::array<double, 2>{0.0, clamp01(z[1], N0)},
        std::array<double, 2>{clamp01(z[0], N0), 0.0},
        std::array<double, 2>{a_edge, N0 - a_edge},
    };
    std::array<double, 2> best{};
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        const double d = std::hypot(p[0] - z[0], p[1] - z[1]);
        if (d < best_d) {
            best_d = d;
            best   = p;
        }
    }
    return best;
}

double optimality_residual_p0(const IdentCandidate& c, const Trajectory& traj, const AdjointTrajectory& adj,
                              const IdentWeights& w, double N0)
{
    IdentProblem prob;
    prob.weights     = w;
    prob.grid        = traj.grid;
    prob.params.N    = N0;
    prob.obs.L0      = 0.0;
    prob.obs.R0      = 0.0;
    const Point pt{c, traj, adj, 0.0};
    return certificate(residual_vector(pt, prob), traj.grid.size());
}

IdentCandidate default_candidate(const IdentProblem& prob, double beta_init)
{
    const double N0 = prob.N0();
    return IdentCandidate{
        CoefficientTable::on_uniform_grid(prob.grid.t0, prob.grid.T, std::vector<double>(prob.grid.size(), beta_init)),
        0.25 * N0, 0.25 * N0};
}

IdentResult solve_p0(const IdentProblem& prob, const IdentConfig& cfg)
{
    return solve_p0(prob, cfg, default_candidate(prob, cfg.beta_init));
}

namespace {

// Projected gradient and projected Newton-CG iterations on one problem.
// Unknowns x = (beta_0..beta_M, A0, I0); beta carries the L2 metric of the
// grid (trapezoid weights).
class StageSolver {
public:
    StageSolver(const IdentProblem& prob, const IdentConfig& cfg, IdentResult& res)
        : prob_(prob), cfg_(cfg), res_(res), ev_(prob, res), n_(prob.grid.size()),
          nn_(static_cast<Eigen::Index>(prob.grid.size())), N0_(prob.N0()), weights_(nn_ + 2)
    {
        const std::vector<double> tw = trapezoid_weights(prob.grid);
        for (std::size_t k = 0; k < n_; ++k) {
            weights_[static_cast<Eigen::Index>(k)] = tw[k];
        }
        weights_[nn_]     = 1.0;
        weights_[nn_ + 1] = 1.0;
    }

    void start(const Eigen::VectorXd& x0)
    {
        x_     = x0;
        cur_   = ev_.eval(to_candidate(x_));
        gx_    = gradient(cur_);
        resid_ = certificate(residual_vector(cur_, prob_), n_);
    }

    double residual() const noexcept { return resid_; }
    const Eigen::VectorXd& x() const noexcept { return x_; }
    Point& point() noexcept { return cur_; }

    /// Projected gradient steps; returns false when the line search fails.
    bool gradient_step()
    {
        if (!arc_search(-gx_, gradient_scale_)) {
            return false;
        }
        gradient_scale_ *= 4.0;
        ++res_.gradient_steps;
        return true;
    }

    /// One projected Newton iteration; returns false when no step was taken.
    bool newton_step()
    {
        const double a0 = prob_.weights.alpha0;
        const double a1 = prob_.weights.alpha1;
        const double mu = a1 > 0.0 ? 0.0 : 1e-10;
        const double mu_a = a0 > 0.0 ? 0.0 : 1e-10;
        const Eigen::Matrix2d a_block =
            (Eigen::Matrix2d() << 2.0 * a0 + mu_a, a0, a0, 2.0 * a0 + mu_a).finished();
        const auto a_ldlt = a_block.ldlt();

        // Components within eps_act of a bound whose gradient points
        // outward are held by the bound. For (A0, I0) the free directions
        // form the subspace Pa: the plane, an edge of K0, or nothing.
        const double eps_act = std::min(1e-3 * (1.0 + x_.head(nn_).maxCoeff()), resid_);
        Eigen::VectorXd beta_mask = Eigen::VectorXd::Ones(nn_ + 2);
        for (Eigen::Index k = 0; k < nn_; ++k) {
            if (x_[k] <= eps_act && gx_[k] > 0.0) {
                beta_mask[k] = 0.0;
            }
        }
        beta_mask[nn_]     = 0.0;
        beta_mask[nn_ + 1] = 0.0;
        const Eigen::Vector2d ga(gx_[nn_], gx_[nn_ + 1]);
        std::vector<Eigen::Vector2d> normals;
        if (x_[nn_] <= eps_act && ga[0] > 0.0) {
            normals.emplace_back(-1.0, 0.0);
        }
        if (x_[nn_ + 1] <= eps_act && ga[1] > 0.0) {
            normals.emplace_back(0.0, -1.0);
        }
        if (x_[nn_] + x_[nn_ + 1] >= N0_ - eps_act && ga[0] + ga[1] < 0.0) {
            normals.emplace_back(M_SQRT1_2, M_SQRT1_2);
        }
        Eigen::Matrix2d Pa = Eigen::Matrix2d::Identity();
        if (normals.size() == 1) {
            Pa -= normals[0] * normals[0].transpose();
        }
        else if (normals.size() > 1) {
            Pa.setZero();
        }
        auto restrict = [&](const Eigen::VectorXd& v) {
            Eigen::VectorXd out = v.cwiseProduct(beta_mask);
            out.tail(2)         = Pa * v.tail(2);
            return out;
        };
        auto solve_a = [&](const Eigen::Vector2d& r) -> Eigen::Vector2d {
            if (normals.empty()) {
                return a_ldlt.solve(r);
            }
            if (normals.size() == 1) {
                const Eigen::Vector2d t(-normals[0][1], normals[0][0]);
                return t * (t.dot(r) / t.dot(a_block * t));
            }
            return Eigen::Vector2d::Zero();
        };

        // Gauss-Newton preconditioner B + jL <jL,.> + jR <jR,.>, B the
        // regularization block; its inverse is explicit since the data term
        // has rank two.
        const std::array<Eigen::VectorXd, 2> U{restrict(data_sensitivity(comp::L)),
                                               restrict(data_sensitivity(comp::R))};
        auto apply_B_inv = [&](const Eigen::VectorXd& r) {
            Eigen::VectorXd out = r.cwiseProduct(beta_mask) / (a1 + mu);
            out.tail(2)         = solve_a(Pa * Eigen::Vector2d(r[nn_], r[nn_ + 1]));
            return out;
        };
        const std::array<Eigen::VectorXd, 2> Z{apply_B_inv(U[0]), apply_B_inv(U[1])};
        Eigen::Matrix2d C = Eigen::Matrix2d::Identity();
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                C(i, j) += dot(U[i], Z[j]);
            }
        }
        const auto C_ldlt = C.ldlt();
        auto precondition = [&](const Eigen::VectorXd& r) {
            const Eigen::VectorXd y = apply_B_inv(r);
            const Eigen::Vector2d c = C_ldlt.solve(Eigen::Vector2d(dot(U[0], y), dot(U[1], y)));
            return Eigen::VectorXd(y - c[0] * Z[0] - c[1] * Z[1]);
        };

        const double xnorm = std::sqrt(dot(x_, x_));
        auto hess          = [&](const Eigen::VectorXd& v) {
            const Eigen::VectorXd vf = restrict(v);
            const double vn          = std::sqrt(dot(vf, vf));
            if (vn == 0.0) {
                return Eigen::VectorXd(Eigen::VectorXd::Zero(v.size()));
            }
            const double tau         = 1e-7 * (1.0 + xnorm) / vn;
            const Point shifted      = ev_.eval(to_candidate(project(x_ + tau * vf)));
            const Eigen::VectorXd hv = (gradient(shifted) - gx_) / tau;
            return Eigen::VectorXd(restrict(hv));
        };

        // held components move along the scaled negative gradient and are
        // clipped by the projection
        Eigen::VectorXd bound_step = -gx_.cwiseProduct(Eigen::VectorXd::Ones(nn_ + 2) - beta_mask) / (a1 + mu);
        const Eigen::Vector2d ga_held = ga - Pa * ga;
        bound_step.tail(2)            = ga_held.isZero(0.0) ? Eigen::Vector2d::Zero()
                                                            : Eigen::Vector2d(-ga_held / std::max(a0 + mu_a, 1e-300));

        const Eigen::VectorXd gfree = restrict(gx_);
        const CgResult cg = conjugate_gradient(hess, precondition, Eigen::VectorXd(-gfree), weights_, cfg_.krylov_dim,
                                               1e-3);
        const Eigen::VectorXd newton = cg.x + bound_step;
        if (arc_search(newton, 1.0)) {
            ++res_.newton_steps;
            return true;
        }
        const Eigen::VectorXd gauss_newton = precondition(Eigen::VectorXd(-gfree)) + bound_step;
        if (arc_search(gauss_newton, 1.0)) {
            ++res_.newton_steps;
            return true;
        }
        // Once the predicted decrease is at rounding level of the cost,
        // Armijo cannot certify anything: take the Newton point if it lowers
        // the optimality residual.
        if (-dot(gx_, newton) < 1e-12 * cur_.cost) {
            try {
                const Eigen::VectorXd xt = project(x_ + newton);
                Point trial              = ev_.eval(to_candidate(xt));
                const double r           = certificate(residual_vector(trial, prob_), n_);
                if (r < resid_) {
                    accept(xt, std::move(trial));
                    ++res_.newton_steps;
                    return true;
                }
            }
            catch (const IntegrationError&) {
            }
        }
        return gradient_step();
    }

    IdentCandidate to_candidate(const Eigen::VectorXd& x) const
    {
        return ev_.candidate(std::vector<double>(x.data(), x.data() + nn_), x[nn_], x[nn_ + 1]);
    }

    Eigen::VectorXd pack(const IdentCandidate& c) const
    {
        Eigen::VectorXd x(nn_ + 2);
        for (std::size_t k = 0; k < n_; ++k) {
            x[static_cast<Eigen::Index>(k)] = c.beta_I(prob_.grid.time(k));
        }
        x[nn_]     = c.A0;
        x[nn_ + 1] = c.I0;
        return x;
    }

private:
    double dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const
    {
        return (weights_.array() * u.array() * v.array()).sum();
    }

    Eigen::VectorXd project(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd y = x.cwiseMax(0.0);
        const auto a      = project_k0({x[nn_], x[nn_ + 1]}, N0_);
        y[nn_]            = a[0];
        y[nn_ + 1]        = a[1];
        return y;
    }

    Eigen::VectorXd gradient(const Point& pt) const
    {
        const IdentGradient gr = gradient_p0(pt.cand, prob_, pt.traj, pt.adj);
        Eigen::VectorXd out(nn_ + 2);
        out.head(nn_) = Eigen::Map<const Eigen::VectorXd>(gr.beta.data(), nn_);
        out[nn_]      = gr.A0;
        out[nn_ + 1]  = gr.I0;
        return out;
    }

    // Riesz representative of the derivative of L(T) (component L) or R(T).
    Eigen::VectorXd data_sensitivity(int component)
    {
        using namespace comp;
        Vector5 final_data    = Vector5::Zero();
        final_data[component] = 1.0;
        const AdjointTrajectory y = adjoint_p0_from(cur_.traj, prob_.params_for(cur_.cand), final_data);
        ++res_.adjoint_solves;
        Eigen::VectorXd out(nn_ + 2);
        for (std::size_t k = 0; k < n_; ++k) {
            out[static_cast<Eigen::Index>(k)] = (y[k][dual::q] - y[k][dual::p]) * cur_.traj[k][S] * cur_.traj[k][I];
        }
        out[nn_]     = y.front()[dual::q] - y.front()[dual::p];
        out[nn_ + 1] = y.front()[dual::d] - y.front()[dual::p];
        return out;
    }

    void accept(const Eigen::VectorXd& x, Point pt)
    {
        x_     = x;
        cur_   = std::move(pt);
        gx_    = gradient(cur_);
        resid_ = certificate(residual_vector(cur_, prob_), n_);
    }

    // Armijo search along the projection arc x(s) = P(x + s d).
    bool arc_search(const Eigen::VectorXd& d, double s)
    {
        for (int bt = 0; bt < cfg_.max_backtracks; ++bt) {
            const Eigen::VectorXd xt = project(x_ + s * d);
            const double decrease    = dot(gx_, xt - x_);
            if (!(decrease < 0.0)) {
                return false;
            }
            IdentCandidate cand = to_candidate(xt);
            if (ev_.cost(cand) <= cur_.cost + 1e-4 * decrease) {
                accept(xt, ev_.eval(std::move(cand)));
                return true;
            }
            s *= 0.5;
        }
        return false;
    }

    const IdentProblem& prob_;
    const IdentConfig& cfg_;
    IdentResult& res_;
    Evaluator ev_;
    std::size_t n_;
    Eigen::Index nn_;
    double N0_;
    Eigen::VectorXd weights_;

    Eigen::VectorXd x_;
    Point cur_;
    Eigen::VectorXd gx_;
    double resid_          = 0.0;
    double gradient_scale_ = 1.0;
};

} // namespace

IdentResult solve_p0(const IdentProblem& prob, const IdentConfig& cfg, const IdentCandidate& init)
{
    if (auto errs = check_candidate(init, prob); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    IdentResult res;

    // Continuation in the weights: small weights make the multipliers
    // m / alpha of a poor starting point large, so the problem is first solved
    // with both weights scaled up to cfg.continuation_start and the scale is
    // then divided by ten per stage, each stage warm-started.
    const double wmax = std::max(prob.weights.alpha0, prob.weights.alpha1);
    double scale      = 1.0;
    while (wmax > 0.0 && wmax * scale * 10.0 <= cfg.continuation_start) {
        scale *= 10.0;
    }

    IdentProblem stage = prob;
    Eigen::VectorXd x;
    {
        StageSolver probe(prob, cfg, res);
        x = probe.pack(init);
    }
    bool first = true;
    while (true) {
        const bool final_stage = scale == 1.0;
        stage.weights          = IdentWeights{prob.weights.alpha0 * scale, prob.weights.alpha1 * scale};
        StageSolver solver(stage, cfg, res);
        solver.start(x);
        const double stage_tol = final_stage ? cfg.tol : cfg.stage_tol;
        if (final_stage) {
            res.cost_history.push_back(solver.point().cost);
        }
        auto step_done = [&] {
            ++res.iterations;
            if (final_stage) {
                res.cost_history.push_back(solver.point().cost);
            }
        };
        if (first) {
            for (int it = 0; it < cfg.gradient_iters && res.iterations < cfg.max_iters && solver.residual() > stage_tol;
                 ++it) {
                if (!solver.gradient_step()) {
                    break;
                }
                step_done();
            }
            first = false;
        }
        int failures = 0;
        while (solver.residual() > stage_tol && res.iterations < cfg.max_iters) {
            if (solver.newton_step()) {
                failures = 0;
                step_done();
                continue;
            }
            ++res.iterations;
            if (++failures >= 2) {
                break;
            }
        }
        x = solver.x();
        if (final_stage || res.iterations >= cfg.max_iters) {
            Point& cur              = solver.point();
            res.candidate           = cur.cand;
            res.cost                = cur.cost;
            res.optimality_residual = solver.residual();
            const Vector5& XT       = cur.traj.back();
            const double dL         = XT[comp::L] - prob.obs.LT;
            const double dR         = XT[comp::R] - prob.obs.RT;
            res.mismatch            = dL * dL + dR * dR;
            res.trajectory          = std::move(cur.traj);
            res.adjoint             = std::move(cur.adj);
            if (!final_stage) {
                // iteration budget spent before reaching the target weights
                res.cost              = cost_p0(res.candidate, prob, res.trajectory);
                res.adjoint           = adjoint_p0(res.trajectory, prob.params_for(res.candidate), prob.obs);
                res.optimality_residual =
                    optimality_residual_p0(res.candidate, res.trajectory, res.adjoint, prob.weights, prob.N0());
                res.cost_history.push_back(res.cost);
            }
            res.converged = final_stage && res.optimality_residual <= cfg.tol;
            if (res.converged) {
                res.status = "converged";
                return res;
            }
            if (failures >= 2) {
                res.status = "stalled";
                throw StallError<IdentResult>("identification stalled: line search failed", std::move(res));
            }
            res.status = "max_iters reached";
            return res;
        }
        scale /= 10.0;
        if (scale < 1.0) {
            scale = 1.0;
        }
    }
}

} // namespace sailr
