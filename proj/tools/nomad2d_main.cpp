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

#include <nomad2d/cli.hpp>

#include <CLI11.hpp>

#include <string>
#include <utility>
#include <vector>

namespace {

using nomad2d::Scalar;

/// Registers one --<key> flag per scenario config key; values collected as
/// strings and applied over the config file.
struct ConfigOverrides {
    std::vector<std::pair<std::string, std::string>> values;

    void attach(CLI::App* cmd) {
        static const char* keys[] = {
            "n_subchannels",        "cus_per_sc",          "n_d2d_pairs",
            "p_c_max_dbm",          "p_d_max_dbm",         "noise_power_dbm",
            "gamma_th",             "cell_side_m",         "d2d_max_dist_m",
            "pathloss_carrier_mhz", "pathloss_bs_height_m", "pathloss_mobile_height_m",
            "shadowing_sigma_db",   "seed",
        };
        for (const char* key : keys) {
            cmd->add_option_function<std::string>(
                std::string("--") + key,
                [this, key](const std::string& value) { values.emplace_back(key, value); },
                std::string("override config key ") + key);
        }
    }
};

void attach_solver_flags(CLI::App* cmd, nomad2d::SolverFlags& flags) {
    cmd->add_option("--epsilon", flags.epsilon, "convergence precision on the objective");
    cmd->add_option("--max_iterations", flags.max_iterations, "iteration hard stop");
    cmd->add_option("--lambda0", flags.lambda0, "initial multiplier (default 1/P_D_max)");
    cmd->add_option("--theta0", flags.theta0, "step-size scale (default 100/P_D_max^2)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"D2D-underlay NOMA resource allocation simulator"};
    app.require_subcommand(1);

    // gen
    nomad2d::GenArgs gen;
    ConfigOverrides gen_overrides;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a channel realization");
    gen_cmd->add_option("--config", gen.config_path, "scenario config file (key = value)");
    gen_cmd->add_option("--out", gen.out_path, "output realization JSON")->required();
    gen_overrides.attach(gen_cmd);

    // solve
    nomad2d::SolveArgs solve;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve one realization");
    solve_cmd->add_option("--channels", solve.channels_path, "realization JSON")->required();
    solve_cmd->add_option("--scheme", solve.scheme, "noma or ofdma")
        ->check(CLI::IsMember({"noma", "ofdma"}));
    solve_cmd->add_option("--out", solve.out_path, "output allocation JSON")->required();
    solve_cmd->add_option("--trace", solve.trace_path, "iteration trace CSV");
    attach_solver_flags(solve_cmd, solve.solver);

    // sweep
    nomad2d::SweepArgs sweep;
    ConfigOverrides sweep_overrides;
    std::string schemes = "noma,ofdma";
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over gamma_th and M");
    sweep_cmd->add_option("--config", sweep.config_path, "base scenario config file");
    sweep_cmd->add_option("--gamma_min", sweep.spec.gamma_min, "lowest CU rate requirement");
    sweep_cmd->add_option("--gamma_max", sweep.spec.gamma_max, "highest CU rate requirement");
    sweep_cmd->add_option("--gamma_steps", sweep.spec.gamma_steps, "grid points");
    sweep_cmd->add_option("--m_values", sweep.spec.m_values, "CUs per SC values")->delimiter(',');
    sweep_cmd->add_option("--realizations", sweep.spec.realizations, "Monte-Carlo realizations");
    sweep_cmd->add_option("--schemes", schemes, "comma list from {noma, ofdma}");
    sweep_cmd->add_option("--out_rows", sweep.spec.rows_path, "per-cell CSV path");
    sweep_cmd->add_option("--out_agg", sweep.spec.agg_path, "aggregate CSV path");
    sweep_cmd->add_option("--threads", sweep.spec.threads, "worker threads (0: hardware)");
    sweep_overrides.attach(sweep_cmd);
    attach_solver_flags(sweep_cmd, sweep.solver);

    // verify
    nomad2d::VerifyArgs verify;
    CLI::App* verify_cmd = app.add_subcommand("verify", "check an allocation against a realization");
    verify_cmd->add_option("--channels", verify.channels_path, "realization JSON")->required();
    verify_cmd->add_option("--alloc", verify.alloc_path, "allocation JSON")->required();

    // oracle
    nomad2d::OracleArgs oracle;
    CLI::App* oracle_cmd = app.add_subcommand("oracle", "brute-force optimum and solver gap");
    oracle_cmd->add_option("--channels", oracle.channels_path, "realization JSON")->required();
    oracle_cmd->add_option("--grid", oracle.grid_points, "grid points per dimension");
    attach_solver_flags(oracle_cmd, oracle.solver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? nomad2d::exit_ok : nomad2d::exit_validation;
    }

    if (gen_cmd->parsed()) {
        gen.overrides = std::move(gen_overrides.values);
        return nomad2d::cmd_gen(gen);
    }
    if (solve_cmd->parsed()) return nomad2d::cmd_solve(solve);
    if (sweep_cmd->parsed()) {
        sweep.overrides = std::move(sweep_overrides.values);
        sweep.spec.run_noma = schemes.find("noma") != std::string::npos;
        sweep.spec.run_ofdma = schemes.find("ofdma") != std::string::npos;
        return nomad2d::cmd_sweep(sweep);
    }
    if (verify_cmd->parsed()) return nomad2d::cmd_verify(verify);
    if (oracle_cmd->parsed()) return nomad2d::cmd_oracle(oracle);
    return nomad2d::exit_validation;
}
