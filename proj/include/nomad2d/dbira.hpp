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

#include <nomad2d/cupower.hpp>
#include <nomad2d/scenario.hpp>
#include <nomad2d/types.hpp>

#include <string>
#include <vector>

namespace nomad2d {

/// Multiplier step-size schedule; iteration numbers are 1-based.
struct StepSchedule {
    enum class Rule { diminishing_sqrt, diminishing_linear, constant };
    Rule rule = Rule::diminishing_sqrt;
    Scalar theta0 = 1.0;

    Scalar at(int iteration) const {
        switch (rule) {
            case Rule::diminishing_sqrt: return theta0 / std::sqrt(static_cast<Scalar>(iteration));
            case Rule::diminishing_linear: return theta0 / static_cast<Scalar>(iteration);
            case Rule::constant: break;
        }
        return theta0;
    }
};

struct SolverSettings {
    Scalar epsilon = 1e-4;    // convergence precision on the objective
    int max_iterations = 500;
    Scalar lambda0 = 1.0;     // initial multiplier per pair
    StepSchedule step;
    int stability_window = 10;  // iterations the running maxima must plateau
    enum class TieRule { lowest_index, highest_index };
    TieRule tie_rule = TieRule::lowest_index;

    /// Defaults whose scale tracks the pair budget: lambda0 = 1/P and a
    /// diminishing step theta0/sqrt(t) with theta0 = 100/P^2. The 1/P^2
    /// scaling keeps the dual trajectory invariant under joint rescaling of
    /// all powers and the noise; the constant is tuned so the default
    /// workloads settle within tens of iterations.
    static SolverSettings defaults_for_budget(Scalar p_d_max_w);

    void validate() const;
};

struct DualState {
    ArrayX lambda;          // (K) multipliers, >= 0
    ArrayX beta_threshold;  // (N) per-SC max marginal value, diagnostic only
    int iteration = 0;
    std::vector<Scalar> objective_trace;
    std::vector<ArrayX> lambda_trace;  // multipliers entering each iteration
    std::vector<ArrayX> slack_trace;   // per-pair budget slack at each iteration
};

struct Allocation {
    std::vector<int> assignment;  // (N) owning pair index, or -1
    ArrayXX d2d_power;            // (N x K), nonzero only at the owner
    ArrayXX cu_power;             // (N x M)
    ArrayX d2d_rates;             // (N) achieved rate of the owning pair
    Scalar objective = 0.0;       // sum of assigned D2D rates

    int n_sc() const { return static_cast<int>(assignment.size()); }
};

struct SolveResult {
    Allocation allocation;
    DualState dual;
    bool converged = false;
};

/// Thrown when an iterate turns non-finite; carries the trace so the
/// front end can dump it.
struct SolverNumericError : NumericError {
    SolverNumericError(const std::string& msg, DualState state_)
        : NumericError(msg), state(std::move(state_)) {}
    DualState state;
};

/// Unconstrained stationary power of the saturating rate curve at price
/// lambda_k: the larger root of
///   (d+1) t^2 + (d+2) e t + e^2 - d e / (lambda ln 2) = 0.
/// Returns kUnbounded for lambda_k = 0 (the marginal rate never reaches a
/// zero price).
Scalar optimal_t(Scalar lambda_k, Scalar d, Scalar e);

/// Stationary power for the cu_idle rate curve log2(1 + slope q); may be
/// negative, kUnbounded for lambda_k = 0.
Scalar optimal_t_linear(Scalar lambda_k, Scalar slope);

/// Projection of a stationary power onto [0, q_cap]; an unbounded q_cap (and
/// an unbounded t) falls back to the pair budget.
Scalar clamp_power(Scalar t, Scalar q_cap, Scalar p_d_max_w);

/// Marginal value of granting a subchannel at clamped power T:
/// H = R(T) - T R'(T), zero iff T = 0.
Scalar marginal_value(Scalar t_clamped, Scalar d, Scalar e);
Scalar marginal_value_linear(Scalar t_clamped, Scalar slope);

/// Per-SC owner selection: argmax_k of H when the max is positive, else -1.
std::vector<int> assign_channels(const ArrayXX& h,
                                 SolverSettings::TieRule tie = SolverSettings::TieRule::lowest_index);

/// Projected subgradient step on the per-pair budget multipliers; advances
/// the iteration counter and appends nothing to the trace.
DualState update_duals(DualState state, const ArrayXX& x, Scalar p_d_max_w,
                       const SolverSettings& settings);

/// Rate model and caps for one (SC, pair) grid; shared by the NOMA and the
/// MCU-OFDMA pipelines.
struct LinkRateGrid {
    ArrayXX d;       // (N x K)
    ArrayXX e;       // (N x K)
    ArrayXX q_cap;   // (N x K), kUnbounded allowed
    ArrayXb cu_idle; // (N)

    int n_sc() const { return static_cast<int>(d.rows()); }
    int n_pairs() const { return static_cast<int>(d.cols()); }

    Scalar rate(int n, int k, Scalar q_w) const {
        return cu_idle[n] ? d2d_rate_linear(q_w, d(n, k)) : d2d_rate(q_w, d(n, k), e(n, k));
    }
};

/// Raw dual-solver output, before the scheme-specific CU powers are filled.
struct CoreSolution {
    std::vector<int> assignment;
    ArrayXX d2d_power;  // (N x K)
    ArrayX d2d_rates;   // (N)
    Scalar objective = 0.0;
    DualState dual;
    bool converged = false;
};

/// The dual subgradient loop: per-(SC, pair) stationary powers, clamping,
/// marginal-value assignment, multiplier update; stops when the objective
/// change drops below epsilon or at max_iterations (then the best feasible
/// iterate seen is returned, flagged not converged). The returned powers are
/// budget-feasible; a slightly infeasible final iterate is repaired by
/// proportional rescaling per pair.
CoreSolution solve_core(const LinkRateGrid& grid, Scalar p_d_max_w, const SolverSettings& settings);

/// Full pipeline on a NOMA realization: solve_core on the coefficient grid,
/// then CU powers recovered from the closed form.
SolveResult solve(const ChannelRealization& realization, const CoefficientSet& coefficients,
                  Scalar p_d_max_w, const SolverSettings& settings);

/// Iteration trace CSV: iter, objective, lambda_1..K, slack_1..K.
std::string trace_to_csv(const DualState& dual);

}  // namespace nomad2d
