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

#include <nomad2d/dbira.hpp>
#include <nomad2d/oracle.hpp>
#include <nomad2d/scenario.hpp>
#include <nomad2d/types.hpp>

#include <vector>

namespace nomad2d {

/// MCU-OFDMA comparison scheme: the M CUs of each SC occupy orthogonal 1/M
/// bandwidth fractions (noise scales accordingly), while the multiplexed D2D
/// pair spans the whole SC and is interfered by all M CU powers. Same dual
/// solver, different rate model and caps.
struct OfdmaCoefficients {
    // Required CU power is affine in the D2D power:
    //   p(n, k, i) = power_slope[n](k, i) * q + power_base(n, i)
    std::vector<ArrayXX> power_slope;  // per SC: (K x M)
    ArrayXX power_base;                // (N x M)
    ArrayXX d;                         // (N x K) rate parameters, as CoefficientSet
    ArrayXX e;                         // (N x K)
    ArrayXX q_cap;                     // (N x K) BS-budget cap only (no SIC order in OFDMA)
    ArrayXb cu_idle;                   // (N)

    int n_sc() const { return static_cast<int>(power_base.rows()); }
};

/// Smallest CU power meeting the requirement of position i on SC n when pair
/// k transmits q_w across the SC.
Scalar ofdma_cu_power(Scalar q_w, int n, int i, int k, const ChannelRealization& realization,
                      Scalar gamma_ni, Scalar noise_w);

/// D2D rate with the summed OFDMA CU powers as interference.
Scalar ofdma_d2d_rate(Scalar q_w, int n, int k, const ChannelRealization& realization,
                      ConstArrayRef cu_power_row, Scalar noise_w);

OfdmaCoefficients build_ofdma_coefficients(const ChannelRealization& realization, const ArrayXX& gamma,
                                           Scalar noise_w, Scalar p_c_max_w);

inline OfdmaCoefficients build_ofdma_coefficients(const ChannelRealization& realization,
                                                  const ScenarioConfig& config) {
    return build_ofdma_coefficients(realization, config.gamma, config.noise_w(), config.p_c_max_w());
}

/// Dual-subgradient solve against the OFDMA rate model.
SolveResult ofdma_solve(const ChannelRealization& realization, const ScenarioConfig& config,
                        const SolverSettings& settings);

/// verify_feasible with OFDMA semantics: fractional-bandwidth CU rates,
/// no SIC-order constraints.
FeasibilityReport ofdma_verify_feasible(const Allocation& alloc, const ChannelRealization& realization,
                                        const ScenarioConfig& config, VerifyTolerances tol = {});

}  // namespace nomad2d
