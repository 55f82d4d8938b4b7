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

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace nomad2d {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(Scalar x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Scalar parse_scalar(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const Scalar x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + value + "' as a number");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed on '" + path + "'");
}

void apply_config_key(ScenarioConfig& config, Scalar& gamma_th, const std::string& key,
                      const std::string& value) {
    if (key == "n_subchannels") config.n_subchannels = static_cast<int>(parse_int(key, value));
    else if (key == "cus_per_sc") config.cus_per_sc = static_cast<int>(parse_int(key, value));
    else if (key == "n_d2d_pairs") config.n_d2d_pairs = static_cast<int>(parse_int(key, value));
    else if (key == "p_c_max_dbm") config.p_c_max_dbm = parse_scalar(key, value);
    else if (key == "p_d_max_dbm") config.p_d_max_dbm = parse_scalar(key, value);
    else if (key == "noise_power_dbm") config.noise_power_dbm = parse_scalar(key, value);
    else if (key == "gamma_th") gamma_th = parse_scalar(key, value);
    else if (key == "cell_side_m") config.cell_side_m = parse_scalar(key, value);
    else if (key == "d2d_max_dist_m") config.d2d_max_dist_m = parse_scalar(key, value);
    else if (key == "pathloss_carrier_mhz") config.pathloss_params.carrier_mhz = parse_scalar(key, value);
    else if (key == "pathloss_bs_height_m") config.pathloss_params.bs_height_m = parse_scalar(key, value);
    else if (key == "pathloss_mobile_height_m") {
        config.pathloss_params.mobile_height_m = parse_scalar(key, value);
    } else if (key == "shadowing_sigma_db") config.shadowing_sigma_db = parse_scalar(key, value);
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else throw ConfigError("unknown config key '" + key + "'");
}

ScenarioConfig load_config(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
    ScenarioConfig config;
    Scalar gamma_th = 1.0;
    if (!path.empty()) {
        const std::string text = read_text_file(path);
        std::istringstream lines(text);
        std::string line;
        int lineno = 0;
        while (std::getline(lines, line)) {
            ++lineno;
            const auto comment = line.find('#');
            if (comment != std::string::npos) line.erase(comment);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
            }
            apply_config_key(config, gamma_th, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const auto& [key, value] : overrides) apply_config_key(config, gamma_th, key, value);
    config.set_uniform_gamma(gamma_th);
    config.validate();
    return config;
}

SolverSettings SolverFlags::resolve(Scalar p_d_max_w) const {
    SolverSettings s = SolverSettings::defaults_for_budget(p_d_max_w);
    if (epsilon) s.epsilon = *epsilon;
    if (max_iterations) s.max_iterations = *max_iterations;
    if (lambda0) s.lambda0 = *lambda0;
    if (theta0) s.step.theta0 = *theta0;
    s.validate();
    return s;
}

namespace {

json array_to_json(const ArrayXX& a) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ArrayXX array_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw IoError(std::string("allocation json: ") + name + " must be a 2-d array");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    ArrayXX out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw IoError(std::string("allocation json: ragged rows in ") + name);
        }
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = j[r][c].get<Scalar>();
    }
    return out;
}

}  // namespace

std::string allocation_to_json(const Allocation& alloc, const std::string& scheme, bool converged,
                               int iterations) {
    json j;
    j["format"] = "nomad2d.allocation.v1";
    j["scheme"] = scheme;
    j["objective"] = alloc.objective;
    j["converged"] = converged;
    j["iterations"] = iterations;
    j["assignment"] = alloc.assignment;
    j["d2d_power"] = array_to_json(alloc.d2d_power);
    j["cu_power"] = array_to_json(alloc.cu_power);
    json rates = json::array();
    for (Eigen::Index i = 0; i < alloc.d2d_rates.size(); ++i) rates.push_back(alloc.d2d_rates[i]);
    j["d2d_rates"] = std::move(rates);
    return j.dump(2) + "\n";
}

AllocationFile allocation_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("allocation json: parse failed: ") + e.what());
    }
    AllocationFile out;
    try {
        out.scheme = j.at("scheme").get<std::string>();
        out.converged = j.at("converged").get<bool>();
        out.iterations = j.at("iterations").get<int>();
        out.allocation.objective = j.at("objective").get<Scalar>();
        out.allocation.assignment = j.at("assignment").get<std::vector<int>>();
        out.allocation.d2d_power = array_from_json(j.at("d2d_power"), "d2d_power");
        out.allocation.cu_power = array_from_json(j.at("cu_power"), "cu_power");
        const auto& rates = j.at("d2d_rates");
        out.allocation.d2d_rates.resize(static_cast<Eigen::Index>(rates.size()));
        for (Eigen::Index i = 0; i < out.allocation.d2d_rates.size(); ++i) {
            out.allocation.d2d_rates[i] = rates[i].get<Scalar>();
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("allocation json: missing or invalid field: ") + e.what());
    }
    if (out.scheme != "noma" && out.scheme != "ofdma") {
        throw ConfigError("allocation: scheme must be 'noma' or 'ofdma'");
    }
    return out;
}

int cmd_gen(const GenArgs& args) {
    try {
        ScenarioConfig config = load_config(args.config_path, args.overrides);
        const ChannelRealization realization = generate_scenario(config);
        write_text_file(args.out_path, realization_to_json(realization, config));
        std::cout << "gen: N=" << config.n_subchannels << " M=" << config.cus_per_sc
                  << " K=" << config.n_d2d_pairs << " seed=" << config.seed << " -> " << args.out_path
                  << "\n";
        return exit_ok;
    } catch (const IoError& e) {
        std::cerr << "gen: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        std::cerr << "gen: invalid config: " << e.what() << "\n";
        return exit_validation;
    }
}

namespace {

SolveResult run_scheme(const std::string& scheme, const RealizationFile& input,
                       const SolverSettings& settings) {
    if (scheme == "ofdma") return ofdma_solve(input.realization, input.config, settings);
    const CoefficientSet coeffs = build_coefficients(input.realization, input.config);
    return solve(input.realization, coeffs, input.config.p_d_max_w(), settings);
}

}  // namespace

int cmd_solve(const SolveArgs& args) {
    RealizationFile input;
    SolverSettings settings;
    try {
        input = realization_from_json(read_text_file(args.channels_path));
        settings = args.solver.resolve(input.config.p_d_max_w());
        if (args.scheme != "noma" && args.scheme != "ofdma") {
            throw ConfigError("scheme: must be 'noma' or 'ofdma'");
        }
    } catch (const IoError& e) {
        std::cerr << "solve: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        std::cerr << "solve: invalid input: " << e.what() << "\n";
        return exit_validation;
    }
    try {
        const SolveResult result = run_scheme(args.scheme, input, settings);
        write_text_file(args.out_path, allocation_to_json(result.allocation, args.scheme,
                                                          result.converged, result.dual.iteration));
        if (!args.trace_path.empty()) {
            write_text_file(args.trace_path, trace_to_csv(result.dual));
        }
        std::cout << "solve: scheme=" << args.scheme << " objective=" << fmt(result.allocation.objective)
                  << " iterations=" << result.dual.iteration
                  << " converged=" << (result.converged ? "true" : "false") << " -> " << args.out_path
                  << "\n";
        return exit_ok;
    } catch (const SolverNumericError& e) {
        const std::string dump_path =
            args.trace_path.empty() ? args.out_path + ".trace_dump.csv" : args.trace_path;
        try {
            write_text_file(dump_path, trace_to_csv(e.state));
            std::cerr << "solve: numeric failure: " << e.what() << " (trace dumped to " << dump_path
                      << ")\n";
        } catch (const IoError& io) {
            std::cerr << "solve: numeric failure: " << e.what() << " (trace dump failed: " << io.what()
                      << ")\n";
        }
        return exit_numeric;
    } catch (const IoError& e) {
        std::cerr << "solve: io error: " << e.what() << "\n";
        return exit_io;
    }
}

int cmd_verify(const VerifyArgs& args) {
    try {
        const RealizationFile input = realization_from_json(read_text_file(args.channels_path));
        const AllocationFile alloc = allocation_from_json(read_text_file(args.alloc_path));
        const FeasibilityReport report =
            alloc.scheme == "ofdma"
                ? ofdma_verify_feasible(alloc.allocation, input.realization, input.config)
                : verify_feasible(alloc.allocation, input.realization, input.config);
        std::cout << report_to_json(report);
        return report.overall ? exit_ok : exit_infeasible;
    } catch (const IoError& e) {
        std::cerr << "verify: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        std::cerr << "verify: invalid input: " << e.what() << "\n";
        return exit_validation;
    }
}

int cmd_oracle(const OracleArgs& args) {
    try {
        const RealizationFile input = realization_from_json(read_text_file(args.channels_path));
        const SolverSettings settings = args.solver.resolve(input.config.p_d_max_w());
        const Allocation oracle = brute_force(input.realization, input.config, args.grid_points);
        const SolveResult dbira = run_scheme("noma", input, settings);
        const Scalar gap =
            oracle.objective > 0.0
                ? (oracle.objective - dbira.allocation.objective) / oracle.objective * 100.0
                : 0.0;
        std::cout << "oracle: grid=" << args.grid_points << " objective=" << fmt(oracle.objective)
                  << "\n"
                  << "dbira: objective=" << fmt(dbira.allocation.objective)
                  << " iterations=" << dbira.dual.iteration << "\n"
                  << "gap: " << fmt(gap) << "%\n";
        return exit_ok;
    } catch (const InstanceSizeError& e) {
        std::cerr << "oracle: refused: " << e.what() << "\n";
        return exit_validation;
    } catch (const IoError& e) {
        std::cerr << "oracle: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        std::cerr << "oracle: invalid input: " << e.what() << "\n";
        return exit_validation;
    } catch (const NumericError& e) {
        std::cerr << "oracle: numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
}

void SweepSpec::validate() const {
    if (!(gamma_min <= gamma_max)) throw ConfigError("gamma_min: must be <= gamma_max");
    if (!(gamma_min >= 0.0)) throw ConfigError("gamma_min: must be >= 0");
    if (gamma_steps < 1) throw ConfigError("gamma_steps: must be >= 1");
    if (m_values.empty()) throw ConfigError("m_values: must not be empty");
    for (int m : m_values) {
        if (m < 1) throw ConfigError("m_values: entries must be >= 1");
    }
    if (realizations < 1) throw ConfigError("realizations: must be >= 1");
    if (!run_noma && !run_ofdma) throw ConfigError("schemes: at least one of noma/ofdma required");
    if (threads < 0) throw ConfigError("threads: must be >= 0");
}

namespace {

std::vector<Scalar> gamma_grid(const SweepSpec& spec) {
    std::vector<Scalar> grid(spec.gamma_steps);
    if (spec.gamma_steps == 1) {
        grid[0] = spec.gamma_min;
        return grid;
    }
    const Scalar step = (spec.gamma_max - spec.gamma_min) / (spec.gamma_steps - 1);
    for (int i = 0; i < spec.gamma_steps; ++i) grid[i] = spec.gamma_min + i * step;
    return grid;
}

std::string sanitize_status(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

}  // namespace

std::vector<SweepRow> run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                                const SolverFlags& solver) {
    spec.validate();
    const std::vector<Scalar> grid = gamma_grid(spec);
    std::vector<std::string> schemes;
    if (spec.run_noma) schemes.push_back("noma");
    if (spec.run_ofdma) schemes.push_back("ofdma");

    struct WorkItem {
        int m = 0;
        int realization = 0;
    };
    std::vector<WorkItem> work;
    work.reserve(spec.m_values.size() * spec.realizations);
    for (int m : spec.m_values) {
        for (int r = 0; r < spec.realizations; ++r) work.push_back({m, r});
    }

    const SolverSettings settings = solver.resolve(base.p_d_max_w());
    std::vector<std::vector<SweepRow>> slots(work.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= work.size()) return;
            const WorkItem item = work[idx];
            std::vector<SweepRow>& rows = slots[idx];
            ScenarioConfig config = base;
            config.cus_per_sc = item.m;
            config.seed = base.seed + static_cast<std::uint64_t>(item.realization);
            config.set_uniform_gamma(grid.front());

            ChannelRealization realization;
            std::string gen_error;
            try {
                realization = generate_scenario(config);
            } catch (const std::exception& e) {
                gen_error = e.what();
            }
            for (const Scalar gamma_th : grid) {
                config.set_uniform_gamma(gamma_th);
                for (const std::string& scheme : schemes) {
                    SweepRow row;
                    row.gamma_th = gamma_th;
                    row.m = item.m;
                    row.scheme = scheme;
                    row.realization = item.realization;
                    if (!gen_error.empty()) {
                        row.objective = std::numeric_limits<Scalar>::quiet_NaN();
                        row.status = sanitize_status("error:" + gen_error);
                        rows.push_back(std::move(row));
                        continue;
                    }
                    try {
                        SolveResult result;
                        FeasibilityReport report;
                        if (scheme == "ofdma") {
                            result = ofdma_solve(realization, config, settings);
                            report = ofdma_verify_feasible(result.allocation, realization, config);
                        } else {
                            const CoefficientSet coeffs = build_coefficients(realization, config);
                            result = solve(realization, coeffs, config.p_d_max_w(), settings);
                            report = verify_feasible(result.allocation, realization, config);
                        }
                        row.objective = result.allocation.objective;
                        row.iterations = result.dual.iteration;
                        row.converged = result.converged;
                        row.feasible = report.overall;
                        row.status = report.overall ? "ok" : "infeasible";
                    } catch (const std::exception& e) {
                        row.objective = std::numeric_limits<Scalar>::quiet_NaN();
                        row.status = sanitize_status("error:" + std::string(e.what()));
                    }
                    rows.push_back(std::move(row));
                }
            }
        }
    };

    unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(work.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<SweepRow> rows;
    rows.reserve(work.size() * grid.size() * schemes.size());
    for (auto& slot : slots) {
        for (auto& row : slot) rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.gamma_th != b.gamma_th) return a.gamma_th < b.gamma_th;
        if (a.m != b.m) return a.m < b.m;
        if (a.scheme != b.scheme) return a.scheme < b.scheme;
        return a.realization < b.realization;
    });
    return rows;
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "gamma_th,m,scheme,realization,objective,iterations,converged,feasible,status\n";
    for (const SweepRow& r : rows) {
        os << fmt(r.gamma_th) << ',' << r.m << ',' << r.scheme << ',' << r.realization << ','
           << fmt(r.objective) << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ','
           << (r.feasible ? "true" : "false") << ',' << r.status << "\n";
    }
    return os.str();
}

std::string aggregate_to_csv(const std::vector<SweepRow>& rows) {
    struct Key {
        Scalar gamma_th;
        int m;
        std::string scheme;
        bool operator<(const Key& o) const {
            if (gamma_th != o.gamma_th) return gamma_th < o.gamma_th;
            if (m != o.m) return m < o.m;
            return scheme < o.scheme;
        }
    };
    std::map<Key, std::vector<Scalar>> groups;
    for (const SweepRow& r : rows) {
        if (std::isfinite(r.objective)) {
            groups[Key{r.gamma_th, r.m, r.scheme}].push_back(r.objective);
        }
    }
    std::ostringstream os;
    os << "gamma_th,m,scheme,n,mean_objective,stderr_objective\n";
    for (const auto& [key, values] : groups) {
        const auto n = static_cast<Scalar>(values.size());
        Scalar mean = 0.0;
        for (Scalar v : values) mean += v;
        mean /= n;
        Scalar var = 0.0;
        for (Scalar v : values) var += (v - mean) * (v - mean);
        const Scalar stderr_ = values.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
        os << fmt(key.gamma_th) << ',' << key.m << ',' << key.scheme << ',' << values.size() << ','
           << fmt(mean) << ',' << fmt(stderr_) << "\n";
    }
    return os.str();
}

int cmd_sweep(const SweepArgs& args) {
    ScenarioConfig base;
    try {
        base = load_config(args.config_path, args.overrides);
        args.spec.validate();
    } catch (const IoError& e) {
        std::cerr << "sweep: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        std::cerr << "sweep: invalid config: " << e.what() << "\n";
        return exit_validation;
    }
    try {
        const std::vector<SweepRow> rows = run_sweep(base, args.spec, args.solver);
        write_text_file(args.spec.rows_path, rows_to_csv(rows));
        write_text_file(args.spec.agg_path, aggregate_to_csv(rows));
        std::size_t failed = 0;
        for (const SweepRow& r : rows) {
            if (r.status != "ok") ++failed;
        }
        std::cout << "sweep: " << rows.size() << " cells (" << failed << " flagged) -> "
                  << args.spec.rows_path << ", " << args.spec.agg_path << "\n";
        return exit_ok;
    } catch (const IoError& e) {
        std::cerr << "sweep: io error: " << e.what() << "\n";
        return exit_io;
    } catch (const NumericError& e) {
        std::cerr << "sweep: numeric failure: " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace nomad2d
