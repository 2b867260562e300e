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

#include "sailr/model.hpp"

#include "sailr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sailr {

namespace {

std::string join(const std::vector<std::string>& parts)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        os << (i ? "; " : "") << parts[i];
    }
    return os.str();
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors))
{
}

std::vector<std::string> PiecewiseLinear::check(const std::string& name, const std::vector<double>& knots,
                                                const std::vector<double>& values, bool nonnegative)
{
    std::vector<std::string> errs;
    if (values.empty()) {
        errs.push_back(name + ": table needs at least one knot");
    }
    if (knots.size() != values.size()) {
        errs.push_back(name + ": knots and values differ in length");
    }
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (!std::isfinite(knots[k])) {
            errs.push_back(name + ": non-finite knot at index " + std::to_string(k));
        }
        else if (k > 0 && !(knots[k] > knots[k - 1])) {
            errs.push_back(name + ": knots not strictly increasing at index " + std::to_string(k));
        }
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            errs.push_back(name + ": non-finite value at index " + std::to_string(k));
        }
        else if (nonnegative && values[k] < 0.0) {
            errs.push_back(name + ": negative coefficient at index " + std::to_string(k));
        }
    }
    return errs;
}

PiecewiseLinear::PiecewiseLinear(double value)
    : PiecewiseLinear(std::vector<double>{0.0}, std::vector<double>{value})
{
}

PiecewiseLinear::PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values))
{
    if (auto errs = check("table", knots_, values_, false); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
}

std::vector<double> PiecewiseLinear::uniform_knots(double t0, double t1, std::size_t n)
{
    if (n < 2 || !(t1 > t0)) {
        throw DomainError("uniform grid needs at least two knots and t1 > t0");
    }
    const std::size_t M = n - 1;
    const double h      = (t1 - t0) / static_cast<double>(M);
    std::vector<double> knots(n);
    for (std::size_t k = 0; k < M; ++k) {
        knots[k] = t0 + static_cast<double>(k) * h;
    }
    knots[M] = t1;
    return knots;
}

PiecewiseLinear PiecewiseLinear::on_uniform_grid(double t0, double t1, std::vector<double> values)
{
    std::vector<double> knots = uniform_knots(t0, t1, values.size());
    PiecewiseLinear c(std::move(knots), std::move(values));
    c.uniform_h_ = (t1 - t0) / static_cast<double>(c.knots_.size() - 1);
    return c;
}

CoefficientTable::CoefficientTable(double value) : CoefficientTable(std::vector<double>{0.0}, std::vector<double>{value})
{
}

CoefficientTable::CoefficientTable(std::vector<double> knots, std::vector<double> values)
    : PiecewiseLinear(std::move(knots), std::move(values))
{
    if (auto errs = check("coefficient", knots_, values_, true); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
}

CoefficientTable CoefficientTable::on_uniform_grid(double t0, double t1, std::vector<double> values)
{
    std::vector<double> knots = uniform_knots(t0, t1, values.size());
    CoefficientTable c(std::move(knots), std::move(values));
    c.uniform_h_ = (t1 - t0) / static_cast<double>(c.knots_.size() - 1);
    return c;
}

bool PiecewiseLinear::covers(double t0, double t1) const noexcept
{
    return is_constant() || (knots_.front() <= t0 && t1 <= knots_.back());
}

double PiecewiseLinear::operator()(double t) const
{
    if (is_constant()) {
        return values_.front();
    }
    if (!(t >= knots_.front() && t <= knots_.back())) {
        std::ostringstream os;
        os << "time " << t << " outside coefficient table coverage [" << knots_.front() << ", " << knots_.back()
           << "]";
        throw DomainError(os.str());
    }
    const std::size_t last = knots_.size() - 1;
    std::size_t k;
    if (uniform_h_ > 0.0) {
        auto guess = static_cast<std::ptrdiff_t>(std::floor((t - knots_.front()) / uniform_h_));
        k          = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(guess, 0, static_cast<std::ptrdiff_t>(last) - 1));
        while (k > 0 && t < knots_[k]) {
            --k;
        }
        while (k + 1 < last && t > knots_[k + 1]) {
            ++k;
        }
    }
    else {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        k       = it == knots_.end() ? last - 1 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    }
    if (t == knots_[k]) {
        return values_[k];
    }
    if (t == knots_[k + 1]) {
        return values_[k + 1];
    }
    const double w = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
    return (1.0 - w) * values_[k] + w * values_[k + 1];
}

double PiecewiseLinear::sup_norm() const noexcept
{
    return *std::max_element(values_.begin(), values_.end());
}

double PiecewiseLinear::mean(double t0, double t1) const
{
    if (is_constant()) {
        return values_.front();
    }
    if (!covers(t0, t1) || !(t1 > t0)) {
        throw DomainError("mean: interval not covered by coefficient table");
    }
    // exact integral of the piecewise-linear interpolant over [t0, t1]
    std::vector<double> pts{t0};
    for (double k : knots_) {
        if (k > t0 && k < t1) {
            pts.push_back(k);
        }
    }
    pts.push_back(t1);
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        integral += 0.5 * (pts[j + 1] - pts[j]) * ((*this)(pts[j]) + (*this)(pts[j + 1]));
    }
    return integral / (t1 - t0);
}

std::vector<std::string> check_params(const ModelParams& p)
{
    std::vector<std::string> errs;
    auto rate = [&](const char* name, double v) {
        if (!std::isfinite(v) || v < 0.0) {
            errs.push_back(std::string(name) + " must be a finite rate >= 0");
        }
    };
    rate("sigma", p.sigma);
    rate("mu_A", p.mu_A);
    rate("mu_I", p.mu_I);
    rate("mu_L", p.mu_L);
    auto unit = [&](const char* name, double v) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            errs.push_back(std::string(name) + " out of [0,1]");
        }
    };
    unit("l_A", p.l_A);
    unit("l_I", p.l_I);
    if (!(p.k1() > 0.0)) {
        errs.push_back("k1 = sigma + mu_A + l_A must be > 0");
    }
    if (!(p.k2() > 0.0)) {
        errs.push_back("k2 = mu_I + l_I must be > 0");
    }
    if (!std::isfinite(p.N) || !(p.N > 0.0)) {
        errs.push_back("N must be > 0");
    }
    for (const auto& [name, table] : {std::pair<const char*, const CoefficientTable*>{"beta_I", &p.beta_I},
                                      {"beta_A", &p.beta_A},
                                      {"xi", &p.xi}}) {
        for (auto& e : PiecewiseLinear::check(name, table->knots(), table->values(), true)) {
            errs.push_back(std::move(e));
        }
    }
    return errs;
}

const ModelParams& validate_params(const ModelParams& p)
{
    if (auto errs = check_params(p); !errs.empty()) {
        throw ValidationError(std::move(errs));
    }
    return p;
}

std::vector<std::string> check_observations(const Observations& obs, double N)
{
    std::vector<std::string> errs;
    auto frac = [&](const char* name, double v) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            errs.push_back(std::string("observations.") + name + " out of [0,1]");
        }
    };
    frac("L0", obs.L0);
    frac("R0", obs.R0);
    frac("LT", obs.LT);
    frac("RT", obs.RT);
    if (obs.L0 + obs.R0 > N) {
        errs.push_back("observations: L0 + R0 exceeds N");
    }
    if (!(obs.T > 0.0)) {
        errs.push_back("observations.T must be > 0");
    }
    return errs;
}

Vector5 rhs(const Vector5& x, const ModelParams& p, double t)
{
    using namespace comp;
    const double bI = p.beta_I(t);
    const double bA = p.beta_A(t);
    const double xi = p.xi(t);

    const double infection = bI * x[S] * x[I] + bA * x[S] * x[A];
    Vector5 dx;
    dx[S] = -infection + xi * x[R];
    dx[A] = infection - p.k1() * x[A];
    dx[I] = p.sigma * x[A] - p.k2() * x[I];
    dx[L] = p.l_A * x[A] + p.l_I * x[I] - p.mu_L * x[L];
    dx[R] = p.mu_A * x[A] + p.mu_I * x[I] + p.mu_L * x[L] - xi * x[R];
    return dx;
}

} // namespace sailr
