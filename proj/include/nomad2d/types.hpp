/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace nomad2d {

using Scalar = double;
using ArrayX = Eigen::ArrayXd;
using ArrayXX = Eigen::ArrayXXd;
using ArrayXb = Eigen::Array<bool, Eigen::Dynamic, 1>;
using ConstArrayRef = Eigen::Ref<const Eigen::ArrayXd>;
using ConstMatrixRef = Eigen::Ref<const Eigen::ArrayXXd>;

/// Sentinel for an unbounded (absent) power cap. Consumers must branch on it
/// via is_unbounded(); it never participates in arithmetic.
inline constexpr Scalar kUnbounded = std::numeric_limits<Scalar>::infinity();

inline bool is_unbounded(Scalar x) { return std::isinf(x) && x > 0; }

inline Scalar dbm_to_watt(Scalar dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline Scalar db_to_linear(Scalar db) { return std::pow(10.0, db / 10.0); }

/// Invalid configuration or input; message names the violated field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File / serialization failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite value produced during iteration.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Instance exceeds an enumeration bound.
struct InstanceSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic RNG. Draws are hand-rolled on top of mt19937_64 so that a
/// given seed reproduces the same stream on any standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    Scalar uniform() { return static_cast<Scalar>(eng_() >> 11) * 0x1.0p-53; }

    Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    Scalar normal() {
        const Scalar u1 = static_cast<Scalar>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const Scalar u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace nomad2d
