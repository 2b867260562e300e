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

#ifndef SAILR_MODEL_HPP
#define SAILR_MODEL_HPP

#include <Eigen/Core>

#include <string>
#include <vector>

namespace sailr {

using Vector5 = Eigen::Matrix<double, 5, 1>;

/// Component order of a SAILR state vector (and of its tangent s,a,i,l,r).
namespace comp {
enum : int { S = 0, A = 1, I = 2, L = 3, R = 4 };
}

/// Component order of a dual vector; p pairs with S, q with A, d with I,
/// e with L and f with R.
namespace dual {
enum : int { p = 0, q = 1, d = 2, e = 3, f = 4 };
}

/// Piecewise-linear function of time given by its values at knots.
class PiecewiseLinear {
public:
    /// Constant function: a single knot at t = 0, evaluated as the constant
    /// everywhere.
    explicit PiecewiseLinear(double value = 0.0);

    /// Throws ValidationError when the knots are not strictly increasing,
    /// sizes differ or a value is non-finite.
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values);

    /// Values given on n = values.size() uniformly spaced knots from t0 to
    /// t1; the last knot is t1 exactly.
    static PiecewiseLinear on_uniform_grid(double t0, double t1, std::vector<double> values);

    /// Interpolated value at t; exact at knots. Throws DomainError outside
    /// [first, last] knot (single-knot functions are defined everywhere).
    double operator()(double t) const;

    const std::vector<double>& knots() const noexcept { return knots_; }
    const std::vector<double>& values() const noexcept { return values_; }
    bool is_constant() const noexcept { return values_.size() == 1; }
    bool covers(double t0, double t1) const noexcept;
    double sup_norm() const noexcept;
    /// Mean of the interpolant over [t0, t1].
    double mean(double t0, double t1) const;

    /// Structural validation messages for a table named `name`.
    static std::vector<std::string> check(const std::string& name, const std::vector<double>& knots,
                                          const std::vector<double>& values, bool nonnegative);

protected:
    static std::vector<double> uniform_knots(double t0, double t1, std::size_t n);

    std::vector<double> knots_;
    std::vector<double> values_;
    double uniform_h_ = 0.0; // > 0 when the knots are uniform, enables O(1) lookup
};

/// Nonnegative time-varying coefficient, piecewise linear between knots.
class CoefficientTable : public PiecewiseLinear {
public:
    explicit CoefficientTable(double value = 0.0);

    /// Additionally rejects negative values ("negative coefficient").
    CoefficientTable(std::vector<double> knots, std::vector<double> values);

    static CoefficientTable on_uniform_grid(double t0, double t1, std::vector<double> values);
};

/// Piecewise-linear interpolation of a coefficient table at t.
inline double eval_coefficient(const CoefficientTable& c, double t) { return c(t); }

struct ModelParams {
    double sigma = 0.0;
    double mu_A  = 0.0;
    double mu_I  = 0.0;
    double mu_L  = 0.0;
    double l_A   = 0.0;
    double l_I   = 0.0;
    CoefficientTable beta_I{0.0};
    CoefficientTable beta_A{0.0};
    CoefficientTable xi{0.0};
    double N = 1.0;

    double k1() const noexcept { return sigma + mu_A + l_A; }
    double k2() const noexcept { return mu_I + l_I; }

    ModelParams with_controls(double lA, double lI) const
    {
        ModelParams p = *this;
        p.l_A         = lA;
        p.l_I         = lI;
        return p;
    }
};

/// Measured isolated / recovered fractions at t = 0 and t = T.
struct Observations {
    double L0 = 0.0;
    double R0 = 0.0;
    double LT = 0.0;
    double RT = 0.0;
    double T  = 1.0;
};

/// Violations of the Observations invariants for total population N.
std::vector<std::string> check_observations(const Observations& obs, double N);

/// Returns the list of violated invariants; empty when the parameters are
/// admissible.
std::vector<std::string> check_params(const ModelParams& p);

/// Throws ValidationError listing every violation.
const ModelParams& validate_params(const ModelParams& p);

/// Right-hand side of the SAILR system at time t.
Vector5 rhs(const Vector5& x, const ModelParams& p, double t);

inline double total_population(const Vector5& x) { return x.sum(); }

/// Slack used when asserting nonnegativity of integrated trajectories.
inline constexpr double tol_neg = 1e-10;

inline Vector5 make_state(double s, double a, double i, double l, double r)
{
    Vector5 x;
    x << s, a, i, l, r;
    return x;
}

} // namespace sailr

#endif // SAILR_MODEL_HPP
