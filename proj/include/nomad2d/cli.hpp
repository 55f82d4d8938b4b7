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

#include <nomad2d/baseline.hpp>
#include <nomad2d/dbira.hpp>
#include <nomad2d/oracle.hpp>
#include <nomad2d/scenario.hpp>
#include <nomad2d/types.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nomad2d {

/// Exit codes shared by all subcommands.
enum ExitCode : int {
    exit_ok = 0,
    exit_validation = 1,
    exit_io = 2,
    exit_numeric = 3,
    exit_infeasible = 4,
};

/// Parses the key/value config text format ('key = value', '#' comments).
/// Overrides are applied after the file in the order given; validation runs
/// at the end. An empty path yields the built-in defaults.
ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Applies one config key; throws ConfigError on unknown keys or bad values.
void apply_config_key(ScenarioConfig& config, Scalar& gamma_th, const std::string& key,
                      const std::string& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Optional solver overrides on top of SolverSettings::defaults_for_budget.
struct SolverFlags {
    std::optional<Scalar> epsilon;
    std::optional<int> max_iterations;
    std::optional<Scalar> lambda0;
    std::optional<Scalar> theta0;

    SolverSettings resolve(Scalar p_d_max_w) const;
};

struct AllocationFile {
    Allocation allocation;
    std::string scheme;  // "noma" or "ofdma"
    bool converged = false;
    int iterations = 0;
};

std::string allocation_to_json(const Allocation& alloc, const std::string& scheme, bool converged,
                               int iterations);
AllocationFile allocation_from_json(const std::string& text);

struct GenArgs {
    std::string config_path;  // empty: defaults
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string out_path = "realization.json";
};
int cmd_gen(const GenArgs& args);

struct SolveArgs {
    std::string channels_path;
    std::string scheme = "noma";
    SolverFlags solver;
    std::string out_path = "allocation.json";
    std::string trace_path;  // empty: no trace
};
int cmd_solve(const SolveArgs& args);

struct VerifyArgs {
    std::string channels_path;
    std::string alloc_path;
};
int cmd_verify(const VerifyArgs& args);

struct OracleArgs {
    std::string channels_path;
    int grid_points = 200;
    SolverFlags solver;
};
int cmd_oracle(const OracleArgs& args);

struct SweepSpec {
    Scalar gamma_min = 1.0;
    Scalar gamma_max = 3.0;
    int gamma_steps = 5;
    std::vector<int> m_values = {2, 3, 4};
    int realizations = 1000;
    bool run_noma = true;
    bool run_ofdma = true;
    std::string rows_path = "sweep_rows.csv";
    std::string agg_path = "sweep_agg.csv";
    int threads = 0;  // 0: hardware concurrency

    void validate() const;
};

struct SweepArgs {
    std::string config_path;  // base scenario; cus_per_sc/gamma come from the sweep grid
    std::vector<std::pair<std::string, std::string>> overrides;
    SweepSpec spec;
    SolverFlags solver;
};
int cmd_sweep(const SweepArgs& args);

/// One sweep cell result; exposed for the test and acceptance harnesses.
struct SweepRow {
    Scalar gamma_th = 0.0;
    int m = 0;
    std::string scheme;
    int realization = 0;
    Scalar objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool feasible = false;
    std::string status;  // ok | infeasible | error:<reason>
};

/// Runs the sweep in-process and returns the rows (sorted) without touching
/// the filesystem; cmd_sweep is a thin wrapper that also writes the CSVs.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                                const SolverFlags& solver);

std::string rows_to_csv(const std::vector<SweepRow>& rows);
std::string aggregate_to_csv(const std::vector<SweepRow>& rows);

}  // namespace nomad2d
