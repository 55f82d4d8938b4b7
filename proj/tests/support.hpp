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

#include <nomad2d/scenario.hpp>
#include <nomad2d/types.hpp>

#include <cmath>

namespace testsupport {

using nomad2d::ArrayX;
using nomad2d::ConstArrayRef;
using nomad2d::Scalar;

/// Independent power-sum oracle: the tail recursion
///   S_M     = (2^g_M - 1)(q xi_M + delta_M)
///   S_i     = (2^g_i - 1)(q xi_i + delta_i) + 2^g_i S_{i+1}
/// evaluated literally, used to cross-check the closed form.
inline Scalar power_sum_recursive(int first_pos, Scalar q, ConstArrayRef xi, ConstArrayRef delta,
                                  ConstArrayRef gamma) {
    const int m = static_cast<int>(gamma.size());
    Scalar s = 0.0;
    for (int i = m - 1; i >= first_pos; --i) {
        s = (std::exp2(gamma[i]) - 1.0) * (q * xi[i] + delta[i]) + std::exp2(gamma[i]) * s;
    }
    return s;
}

inline bool close_rel(Scalar a, Scalar b, Scalar rel) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), Scalar(1e-300)});
}

inline bool close_rel_or_abs(Scalar a, Scalar b, Scalar rel, Scalar abs_tol) {
    return std::abs(a - b) <= std::max(abs_tol, rel * std::max(std::abs(a), std::abs(b)));
}

/// Small random scenario with the default (production) channel statistics.
inline nomad2d::ScenarioConfig small_config(int n, int m, int k, std::uint64_t seed,
                                            Scalar gamma_th = 1.0) {
    nomad2d::ScenarioConfig config;
    config.n_subchannels = n;
    config.cus_per_sc = m;
    config.n_d2d_pairs = k;
    config.seed = seed;
    config.set_uniform_gamma(gamma_th);
    return config;
}

}  // namespace testsupport
