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

#ifndef SAILR_ERRORS_HPP
#define SAILR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sailr {

/// Argument outside the domain where an operation is defined (time out of
/// table coverage, mismatched grids, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Every violated invariant found while validating an input, not only the
/// first one.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> errors);

    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// A non-finite value appeared while stepping an ODE.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step)
    {
    }

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// An optimizer could not make progress. Carries the best iterate found.
template <typename Result>
class StallError : public std::runtime_error {
public:
    StallError(const std::string& what, Result best) : std::runtime_error(what), best_(std::move(best)) {}

    const Result& best() const noexcept { return best_; }

private:
    Result best_;
};

} // namespace sailr

#endif // SAILR_ERRORS_HPP
