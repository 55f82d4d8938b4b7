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
#include <nomad2d/scenario.hpp>
#include <nomad2d/types.hpp>

#include <string>
#include <vector>

namespace nomad2d {

struct VerifyTolerances {
    Scalar rate_rel = 1e-9;   // on rate constraints
    Scalar power_abs = 1e-9;  // watts, on power constraints
};

/// Constraint-by-constraint audit of an Allocation, evaluated from raw gains
/// only. Margins are signed: >= -tolerance means satisfied.
struct FeasibilityReport {
    VerifyTolerances tol;
    std::vector<ArrayX> sic_adjacent_margin;  // per SC: (M-1) normalized-interference gaps, watts
    std::vector<ArrayX> sic_pairwise_margin;  // per SC: one entry per pair j < i, same units
    ArrayXX cu_rate_margin;                   // (N x M) achieved - required, bits/s/Hz
    ArrayX d2d_budget_slack;                  // (K) watts
    ArrayX bs_budget_slack;                   // (N) watts
    std::vector<bool> exclusivity;            // per SC: at most one transmitting pair
    Scalar objective_direct = 0.0;            // recomputed from gains
    Scalar objective_stated = 0.0;

    bool sic_adjacent_ok = false;
    bool sic_pairwise_ok = false;
    bool cu_rate_ok = false;
    bool d2d_budget_ok = false;
    bool bs_budget_ok = false;
    bool exclusivity_ok = false;
    bool objective_consistent = false;
    bool overall = false;
};

/// SINR at CU position i decoding the signal of position j <= i on SC n,
/// straight from the gains (0-based positions).
Scalar cu_sinr_direct(int n, int i, int j, ConstArrayRef cu_power_row, const Allocation& alloc,
                      const ChannelRealization& realization, Scalar noise_w);

/// Checks SIC ordering (adjacent and all-pairs), CU rate requirements, both
/// power budgets and assignment exclusivity by direct evaluation; never uses
/// the closed forms under test.
FeasibilityReport verify_feasible(const Allocation& alloc, const ChannelRealization& realization,
                                  const ScenarioConfig& config, VerifyTolerances tol = {});

std::string report_to_json(const FeasibilityReport& report);

/// Exhaustive assignment enumeration plus per-pair grid search (one 10x
/// refinement of the best cell); ground truth for small instances.
/// Throws InstanceSizeError when (K+1)^N exceeds 1e5.
Allocation brute_force(const ChannelRealization& realization, const ScenarioConfig& config,
                       int grid_points);

}  // namespace nomad2d
