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

#ifndef SAILR_KRYLOV_HPP
#define SAILR_KRYLOV_HPP

#include <Eigen/Dense>

#include <cmath>

namespace sailr {

struct CgResult {
    Eigen::VectorXd x;
    int iterations         = 0;
    double residual        = 0.0;
    bool negative_curvature = false;
};

/// Matrix-free preconditioned conjugate gradients from x = 0 for a
/// self-adjoint operator in the inner product <u, v> = sum_k w_k u_k v_k.
/// On a direction of nonpositive curvature the iterate reached so far is
/// returned, or the preconditioned right-hand side on the first step.
template <typename Op, typename Prec>
CgResult conjugate_gradient(const Op& apply, const Prec& precondition, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& w, int max_iters, double rel_tol)
{
    auto dot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
        return (w.array() * u.array() * v.array()).sum();
    };

    CgResult out;
    out.x             = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = precondition(r);
    Eigen::VectorXd d = z;
    double rz         = dot(r, z);
    const double r0   = std::sqrt(dot(r, r));
    out.residual      = r0;
    for (int it = 0; it < max_iters && out.residual > rel_tol * r0; ++it) {
        const Eigen::VectorXd Ad = apply(d);
        const double curv        = dot(d, Ad);
        if (!(curv > 0.0)) {
            out.negative_curvature = true;
            if (it == 0) {
                out.x = z;
            }
            break;
        }
        const double alpha = rz / curv;
        out.x += alpha * d;
        r -= alpha * Ad;
        z                    = precondition(r);
        const double rz_next = dot(r, z);
        d                    = z + (rz_next / rz) * d;
        rz                   = rz_next;
        out.iterations       = it + 1;
        out.residual         = std::sqrt(dot(r, r));
    }
    return out;
}

} // namespace sailr

#endif // SAILR_KRYLOV_HPP
