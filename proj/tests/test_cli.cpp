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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nomad2d/cli.hpp>

#include "support.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace nomad2d;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("nomad2d_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

const char* kSmallConfig =
    "# test scenario\n"
    "n_subchannels = 4\n"
    "cus_per_sc = 2\n"
    "n_d2d_pairs = 3\n"
    "gamma_th = 1.0\n"
    "seed = 9\n";

}  // namespace

TEST_CASE("config parsing: defaults, file values, overrides, unknown keys") {
    TempDir tmp;
    write_text_file(tmp.file("scenario.cfg"), kSmallConfig);
    const ScenarioConfig config = load_config(tmp.file("scenario.cfg"));
    CHECK(config.n_subchannels == 4);
    CHECK(config.cus_per_sc == 2);
    CHECK(config.n_d2d_pairs == 3);
    CHECK(config.seed == 9);
    CHECK(config.p_c_max_dbm == 35.0);  // default survives
    CHECK(config.gamma(0, 0) == 1.0);

    const ScenarioConfig overridden =
        load_config(tmp.file("scenario.cfg"), {{"n_d2d_pairs", "2"}, {"gamma_th", "0.5"}});
    CHECK(overridden.n_d2d_pairs == 2);
    CHECK(overridden.gamma(0, 0) == 0.5);

    CHECK_THROWS_AS(load_config(tmp.file("scenario.cfg"), {{"bogus_key", "1"}}), ConfigError);
    CHECK_THROWS_AS(load_config(tmp.file("scenario.cfg"), {{"seed", "abc"}}), ConfigError);
    CHECK_THROWS_AS(load_config(tmp.file("missing.cfg")), IoError);
}

TEST_CASE("gen: writes a deterministic realization and validates") {
    TempDir tmp;
    write_text_file(tmp.file("scenario.cfg"), kSmallConfig);

    GenArgs args;
    args.config_path = tmp.file("scenario.cfg");
    args.out_path = tmp.file("real.json");
    CHECK(cmd_gen(args) == exit_ok);
    const std::string first = read_text_file(args.out_path);

    args.out_path = tmp.file("real2.json");
    CHECK(cmd_gen(args) == exit_ok);
    CHECK(read_text_file(args.out_path) == first);

    GenArgs bad = args;
    bad.overrides = {{"n_d2d_pairs", "9"}};  // K > N
    bad.out_path = tmp.file("bad.json");
    CHECK(cmd_gen(bad) == exit_validation);

    GenArgs missing = args;
    missing.config_path = tmp.file("absent.cfg");
    CHECK(cmd_gen(missing) == exit_io);
}

TEST_CASE("solve and verify round trip for both schemes") {
    TempDir tmp;
    GenArgs gen;
    gen.overrides = {{"n_subchannels", "5"}, {"cus_per_sc", "2"}, {"n_d2d_pairs", "3"},
                     {"seed", "17"}};
    gen.out_path = tmp.file("real.json");
    REQUIRE(cmd_gen(gen) == exit_ok);

    for (const std::string scheme : {"noma", "ofdma"}) {
        SolveArgs solve_args;
        solve_args.channels_path = gen.out_path;
        solve_args.scheme = scheme;
        solve_args.out_path = tmp.file("alloc_" + scheme + ".json");
        solve_args.trace_path = tmp.file("trace_" + scheme + ".csv");
        CHECK(cmd_solve(solve_args) == exit_ok);

        const AllocationFile alloc = allocation_from_json(read_text_file(solve_args.out_path));
        CHECK(alloc.scheme == scheme);
        CHECK(alloc.converged);
        CHECK(alloc.iterations > 0);

        const std::string trace = read_text_file(solve_args.trace_path);
        CHECK(trace.rfind("iter,objective", 0) == 0);

        VerifyArgs verify_args;
        verify_args.channels_path = gen.out_path;
        verify_args.alloc_path = solve_args.out_path;
        CHECK(cmd_verify(verify_args) == exit_ok);
    }

    SolveArgs missing;
    missing.channels_path = tmp.file("absent.json");
    missing.out_path = tmp.file("x.json");
    CHECK(cmd_solve(missing) == exit_io);
}

TEST_CASE("verify flags tampered powers and pinpoints the constraints") {
    TempDir tmp;
    GenArgs gen;
    gen.overrides = {{"n_subchannels", "4"}, {"cus_per_sc", "3"}, {"n_d2d_pairs", "2"},
                     {"seed", "23"}};
    gen.out_path = tmp.file("real.json");
    REQUIRE(cmd_gen(gen) == exit_ok);

    SolveArgs solve_args;
    solve_args.channels_path = gen.out_path;
    solve_args.out_path = tmp.file("alloc.json");
    REQUIRE(cmd_solve(solve_args) == exit_ok);

    AllocationFile alloc = allocation_from_json(read_text_file(solve_args.out_path));
    alloc.allocation.d2d_power *= 10.0;
    write_text_file(tmp.file("tampered.json"),
                    allocation_to_json(alloc.allocation, alloc.scheme, alloc.converged,
                                       alloc.iterations));

    VerifyArgs verify_args;
    verify_args.channels_path = gen.out_path;
    verify_args.alloc_path = tmp.file("tampered.json");
    CHECK(cmd_verify(verify_args) == exit_infeasible);
}

TEST_CASE("verify accepts an empty allocation when the CU side is feasible") {
    TempDir tmp;
    GenArgs gen;
    gen.overrides = {{"n_subchannels", "3"}, {"cus_per_sc", "2"}, {"n_d2d_pairs", "2"},
                     {"seed", "31"}};
    gen.out_path = tmp.file("real.json");
    REQUIRE(cmd_gen(gen) == exit_ok);
    const RealizationFile input = realization_from_json(read_text_file(gen.out_path));
    const CoefficientSet cs = build_coefficients(input.realization, input.config);

    Allocation alloc;
    alloc.assignment.assign(3, -1);
    alloc.d2d_power = ArrayXX::Zero(3, 2);
    alloc.d2d_rates = ArrayX::Zero(3);
    alloc.cu_power.resize(3, 2);
    for (int sc = 0; sc < 3; ++sc) {
        alloc.cu_power.row(sc) = cu_powers(0.0, cs.xi[sc].row(0).transpose(),
                                           cs.delta.row(sc).transpose(),
                                           cs.gamma.row(sc).transpose())
                                     .transpose();
    }
    write_text_file(tmp.file("empty.json"), allocation_to_json(alloc, "noma", true, 0));

    VerifyArgs verify_args;
    verify_args.channels_path = gen.out_path;
    verify_args.alloc_path = tmp.file("empty.json");
    CHECK(cmd_verify(verify_args) == exit_ok);
}

TEST_CASE("oracle subcommand reports the gap and refuses oversize instances") {
    TempDir tmp;
    GenArgs gen;
    gen.overrides = {{"n_subchannels", "3"}, {"cus_per_sc", "2"}, {"n_d2d_pairs", "2"},
                     {"seed", "5"}};
    gen.out_path = tmp.file("small.json");
    REQUIRE(cmd_gen(gen) == exit_ok);

    OracleArgs oracle_args;
    oracle_args.channels_path = gen.out_path;
    oracle_args.grid_points = 60;
    CHECK(cmd_oracle(oracle_args) == exit_ok);

    GenArgs big;
    big.out_path = tmp.file("big.json");
    REQUIRE(cmd_gen(big) == exit_ok);  // default N=30, K=10
    OracleArgs oversize;
    oversize.channels_path = big.out_path;
    CHECK(cmd_oracle(oversize) == exit_validation);
}

TEST_CASE("sweep: row accounting, aggregates, determinism") {
    TempDir tmp;
    SweepArgs args;
    args.overrides = {{"n_subchannels", "4"}, {"n_d2d_pairs", "2"}, {"seed", "77"}};
    args.spec.gamma_min = 0.5;
    args.spec.gamma_max = 1.5;
    args.spec.gamma_steps = 3;
    args.spec.m_values = {1, 2};
    args.spec.realizations = 4;
    args.spec.threads = 2;
    args.spec.rows_path = tmp.file("rows.csv");
    args.spec.agg_path = tmp.file("agg.csv");
    CHECK(cmd_sweep(args) == exit_ok);

    const std::string rows = read_text_file(args.spec.rows_path);
    // Header plus |gamma| x |M| x |schemes| x realizations lines.
    const long expected = 3 * 2 * 2 * 4;
    CHECK(std::count(rows.begin(), rows.end(), '\n') == expected + 1);
    CHECK(rows.rfind("gamma_th,m,scheme,realization,objective,iterations,converged,feasible,status",
                     0) == 0);

    const std::string agg = read_text_file(args.spec.agg_path);
    CHECK(std::count(agg.begin(), agg.end(), '\n') == 3 * 2 * 2 + 1);

    // Re-running with one thread reproduces both files byte for byte.
    SweepArgs again = args;
    again.spec.threads = 1;
    again.spec.rows_path = tmp.file("rows2.csv");
    again.spec.agg_path = tmp.file("agg2.csv");
    CHECK(cmd_sweep(again) == exit_ok);
    CHECK(read_text_file(again.spec.rows_path) == rows);
    CHECK(read_text_file(again.spec.agg_path) == agg);
}

TEST_CASE("sweep rows are sorted by keys and flagged rows are kept") {
    ScenarioConfig base = load_config("", {{"n_subchannels", "3"}, {"n_d2d_pairs", "2"},
                                           {"seed", "99"}});
    SweepSpec spec;
    spec.gamma_min = 1.0;
    spec.gamma_max = 2.0;
    spec.gamma_steps = 2;
    spec.m_values = {2};
    spec.realizations = 3;
    spec.threads = 1;
    const std::vector<SweepRow> rows = run_sweep(base, spec, SolverFlags{});
    REQUIRE(rows.size() == 2 * 1 * 2 * 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        const auto key = [](const SweepRow& r) {
            return std::make_tuple(r.gamma_th, r.m, r.scheme, r.realization);
        };
        CHECK(key(a) <= key(b));
    }
    for (const auto& row : rows) CHECK_FALSE(row.status.empty());
}

TEST_CASE("solver flag overrides reach the solver") {
    TempDir tmp;
    GenArgs gen;
    gen.overrides = {{"n_subchannels", "4"}, {"n_d2d_pairs", "2"}, {"seed", "3"}};
    gen.out_path = tmp.file("real.json");
    REQUIRE(cmd_gen(gen) == exit_ok);

    SolveArgs solve_args;
    solve_args.channels_path = gen.out_path;
    solve_args.out_path = tmp.file("alloc.json");
    solve_args.solver.max_iterations = 2;
    solve_args.solver.epsilon = 1e-300;
    CHECK(cmd_solve(solve_args) == exit_ok);
    const AllocationFile alloc = allocation_from_json(read_text_file(solve_args.out_path));
    CHECK_FALSE(alloc.converged);
    CHECK(alloc.iterations == 2);
}
