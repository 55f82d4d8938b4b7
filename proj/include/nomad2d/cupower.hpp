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

#include <utility>
#include <vector>

namespace nomad2d {

/// Derived per-SC / per-pair quantities consumed by the solvers.
///
/// For position i on SC n and pair k (0-based indices):
///   xi[n](k, i)     = cross_gain / cu_gain        (dimensionless)
///   delta(n, i)     = noise / cu_gain             (watts, non-increasing in i)
///   big_gamma(n, j) = 2^(gamma_1+..+gamma_j) * (2^(gamma_{j+1}) - 1)
///   d, e            saturating D2D rate parameters; on SCs whose rate
///                   requirements are all zero (cu_idle) d holds the linear
///                   SINR slope per watt instead and e is unused
///   q_cap           per-(SC, pair) D2D power cap, kUnbounded when absent
struct CoefficientSet {
    std::vector<ArrayXX> xi;  // per SC: (K x M)
    ArrayXX delta;            // (N x M)
    ArrayXX big_gamma;        // (N x M)
    ArrayXX gamma;            // (N x M) source rate requirements
    ArrayX cu_base_power;     // (N): CU power sum at q = 0
    ArrayXX d;                // (N x K)
    ArrayXX e;                // (N x K)
    ArrayXX q_cap;            // (N x K)
    ArrayXb cu_idle;          // (N): all rate requirements zero on this SC

    int n_sc() const { return static_cast<int>(delta.rows()); }
    int n_cu() const { return static_cast<int>(delta.cols()); }
    int n_pairs() const { return static_cast<int>(d.cols()); }
};

/// Element-wise gain ratios for one SC: xi (K x M) and delta (M).
std::pair<ArrayXX, ArrayX> compute_xi_delta(const ArrayXX& cross_gain_sc, ConstArrayRef cu_gain_sc,
                                            Scalar noise_w);

/// Rate-requirement coefficients for one SC; entry j is zero iff the
/// requirement of position j+1 is zero.
ArrayX gamma_coefficients(ConstArrayRef gamma_row);

/// Closed-form sum of the optimal CU powers from position first_pos (0-based)
/// through M-1, given a multiplexed D2D power q_w.
Scalar cumulative_power(int first_pos, Scalar q_w, ConstArrayRef xi_col, ConstArrayRef delta_row,
                        ConstArrayRef gamma_row);

/// Optimal per-position CU powers; every CU rate requirement is met with
/// equality when these powers are applied.
ArrayX cu_powers(Scalar q_w, ConstArrayRef xi_col, ConstArrayRef delta_row, ConstArrayRef gamma_row);

/// Largest D2D power that keeps the required CU power sum within the BS
/// budget; 0 when CU demands already exhaust it, kUnbounded when the CU
/// powers are zero regardless of q.
Scalar q_cap_budget(ConstArrayRef xi_col, ConstArrayRef delta_row, ConstArrayRef big_gamma_row,
                    Scalar p_c_max_w);

/// Largest D2D power that preserves the SIC decoding order; kUnbounded when
/// no adjacent position imposes a constraint.
Scalar q_cap_sic(ConstArrayRef xi_col, ConstArrayRef delta_row);

/// Combined per-(SC, pair) cap; the per-pair total budget is enforced by the
/// solver, not folded in here.
Scalar q_cap_total(Scalar budget_cap, Scalar sic_cap);

/// D2D rate curve parameters for one (SC, pair).
struct D2dRateCoeffs {
    Scalar d = 0.0;
    Scalar e = 0.0;
    bool cu_idle = false;  // d is the linear slope |g|^2 / noise; e unused
};

D2dRateCoeffs d2d_rate_coeffs(Scalar d2d_gain, Scalar bs_to_d2d_gain, ConstArrayRef big_gamma_row,
                              ConstArrayRef xi_col, ConstArrayRef delta_row, Scalar noise_w);

/// Saturating D2D rate log2(1 + d q / (q + e)) in bits/s/Hz.
Scalar d2d_rate(Scalar q_w, Scalar d, Scalar e);

/// Derivative of d2d_rate with respect to q.
Scalar d2d_rate_derivative(Scalar q_w, Scalar d, Scalar e);

/// Rate and derivative for the cu_idle case: log2(1 + slope * q).
Scalar d2d_rate_linear(Scalar q_w, Scalar slope);
Scalar d2d_rate_linear_derivative(Scalar q_w, Scalar slope);

/// All derived quantities for a realization under the given requirements.
CoefficientSet build_coefficients(const ChannelRealization& realization, const ArrayXX& gamma,
                                  Scalar noise_w, Scalar p_c_max_w);

inline CoefficientSet build_coefficients(const ChannelRealization& realization,
                                         const ScenarioConfig& config) {
    return build_coefficients(realization, config.gamma, config.noise_w(), config.p_c_max_w());
}

}  // namespace nomad2d
