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

#include <nomad2d/scenario.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nomad2d {

namespace {

using json = nlohmann::ordered_json;

Scalar mobile_correction_db(Scalar carrier_mhz, Scalar mobile_height_m) {
    const Scalar lf = std::log10(carrier_mhz);
    return (1.1 * lf - 0.7) * mobile_height_m - (1.56 * lf - 0.8);
}

Scalar tx_height(const PathLossParams& p, LinkKind kind) {
    return kind == LinkKind::bs_to_node ? p.bs_height_m : p.mobile_height_m;
}

}  // namespace

Scalar PathLossParams::intercept_db(LinkKind kind) const {
    const Scalar hb = tx_height(*this, kind);
    return 69.55 + 26.16 * std::log10(carrier_mhz) - 13.82 * std::log10(hb) -
           mobile_correction_db(carrier_mhz, mobile_height_m);
}

Scalar PathLossParams::slope_db_per_decade(LinkKind kind) const {
    return 44.9 - 6.55 * std::log10(tx_height(*this, kind));
}

Scalar pathloss_db(const PathLossParams& params, Scalar distance_m, LinkKind kind) {
    if (!(distance_m > 0.0)) {
        throw std::domain_error("pathloss_db: distance_m must be positive");
    }
    return params.intercept_db(kind) + params.slope_db_per_decade(kind) * std::log10(distance_m / 1000.0);
}

void ScenarioConfig::set_uniform_gamma(Scalar gamma_th) {
    gamma = ArrayXX::Constant(n_subchannels, cus_per_sc, gamma_th);
}

void ScenarioConfig::validate() const {
    if (n_subchannels < 1) throw ConfigError("n_subchannels: must be a positive integer");
    if (cus_per_sc < 1) throw ConfigError("cus_per_sc: must be a positive integer");
    if (n_d2d_pairs < 1) throw ConfigError("n_d2d_pairs: must be a positive integer");
    if (n_d2d_pairs > n_subchannels) {
        throw ConfigError("n_d2d_pairs: must satisfy n_d2d_pairs <= n_subchannels");
    }
    if (!std::isfinite(p_c_max_dbm)) throw ConfigError("p_c_max_dbm: must be finite");
    if (!std::isfinite(p_d_max_dbm)) throw ConfigError("p_d_max_dbm: must be finite");
    if (!std::isfinite(noise_power_dbm)) throw ConfigError("noise_power_dbm: must be finite");
    if (gamma.rows() != n_subchannels || gamma.cols() != cus_per_sc) {
        throw ConfigError("gamma: must be an n_subchannels x cus_per_sc matrix");
    }
    if (!gamma.isFinite().all() || (gamma < 0.0).any()) {
        throw ConfigError("gamma: entries must be finite and >= 0");
    }
    if (!(cell_side_m > 0.0) || !std::isfinite(cell_side_m)) {
        throw ConfigError("cell_side_m: must be positive and finite");
    }
    if (!(d2d_max_dist_m > 0.0) || !(d2d_max_dist_m < cell_side_m)) {
        throw ConfigError("d2d_max_dist_m: must satisfy 0 < d2d_max_dist_m < cell_side_m");
    }
    if (!(shadowing_sigma_db >= 0.0) || !std::isfinite(shadowing_sigma_db)) {
        throw ConfigError("shadowing_sigma_db: must be >= 0 and finite");
    }
    if (!(pathloss_params.carrier_mhz > 0.0)) throw ConfigError("pathloss_carrier_mhz: must be positive");
    if (!(pathloss_params.bs_height_m > 0.0)) throw ConfigError("pathloss_bs_height_m: must be positive");
    if (!(pathloss_params.mobile_height_m > 0.0)) {
        throw ConfigError("pathloss_mobile_height_m: must be positive");
    }
}

void ChannelRealization::validate() const {
    const int n = n_sc();
    const int m = n_cu();
    const int k = n_pairs();
    if (n < 1 || m < 1 || k < 1) throw ConfigError("realization: empty dimension");
    if (static_cast<int>(cross_gain.size()) != n) {
        throw ConfigError("cross_gain: must have one (K x M) block per subchannel");
    }
    for (const auto& block : cross_gain) {
        if (block.rows() != k || block.cols() != m) {
            throw ConfigError("cross_gain: block shape must be (n_d2d_pairs x cus_per_sc)");
        }
        if (!block.isFinite().all() || (block <= 0.0).any()) {
            throw ConfigError("cross_gain: gains must be positive and finite");
        }
    }
    if (d2d_gain.rows() != n || d2d_gain.cols() != k || bs_to_d2d_gain.rows() != n ||
        bs_to_d2d_gain.cols() != k) {
        throw ConfigError("d2d_gain/bs_to_d2d_gain: shape must be (n_subchannels x n_d2d_pairs)");
    }
    if (!cu_gain.isFinite().all() || (cu_gain <= 0.0).any()) {
        throw ConfigError("cu_gain: gains must be positive and finite");
    }
    if (!d2d_gain.isFinite().all() || (d2d_gain <= 0.0).any()) {
        throw ConfigError("d2d_gain: gains must be positive and finite");
    }
    if (!bs_to_d2d_gain.isFinite().all() || (bs_to_d2d_gain <= 0.0).any()) {
        throw ConfigError("bs_to_d2d_gain: gains must be positive and finite");
    }
    for (int sc = 0; sc < n; ++sc) {
        for (int i = 0; i + 1 < m; ++i) {
            if (cu_gain(sc, i) > cu_gain(sc, i + 1)) {
                throw ConfigError("cu_gain: rows must be ascending (SIC labeling)");
            }
        }
    }
}

SortedGains order_cus(ConstArrayRef raw_gains) {
    const int m = static_cast<int>(raw_gains.size());
    if (m < 1) throw ConfigError("order_cus: need at least one gain");
    if (!raw_gains.isFinite().all() || (raw_gains <= 0.0).any()) {
        throw ConfigError("order_cus: gains must be positive and finite");
    }
    SortedGains out;
    out.permutation.resize(m);
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](int a, int b) { return raw_gains[a] < raw_gains[b]; });
    out.gains.resize(m);
    for (int i = 0; i < m; ++i) out.gains[i] = raw_gains[out.permutation[i]];
    return out;
}

ScenarioDraw draw_scenario(const ScenarioConfig& config) {
    config.validate();
    const int n = config.n_subchannels;
    const int m = config.cus_per_sc;
    const int k = config.n_d2d_pairs;
    const Scalar half = config.cell_side_m / 2.0;
    Rng rng(config.seed);

    ScenarioDraw draw;
    draw.seed_used = config.seed;
    draw.cu_x.resize(n, m);
    draw.cu_y.resize(n, m);
    for (int sc = 0; sc < n; ++sc) {
        for (int i = 0; i < m; ++i) {
            draw.cu_x(sc, i) = rng.uniform(-half, half);
            draw.cu_y(sc, i) = rng.uniform(-half, half);
        }
    }
    draw.d2d_tx_x.resize(k);
    draw.d2d_tx_y.resize(k);
    draw.d2d_rx_x.resize(k);
    draw.d2d_rx_y.resize(k);
    for (int p = 0; p < k; ++p) {
        draw.d2d_tx_x[p] = rng.uniform(-half, half);
        draw.d2d_tx_y[p] = rng.uniform(-half, half);
        // Receiver uniform over the disc around its transmitter.
        const Scalar radius = config.d2d_max_dist_m * std::sqrt(rng.uniform());
        const Scalar angle = rng.uniform(0.0, 2.0 * M_PI);
        draw.d2d_rx_x[p] = draw.d2d_tx_x[p] + radius * std::cos(angle);
        draw.d2d_rx_y[p] = draw.d2d_tx_y[p] + radius * std::sin(angle);
    }

    const auto link_gain = [&](Scalar ax, Scalar ay, Scalar bx, Scalar by, LinkKind kind) {
        const Scalar dist = std::hypot(ax - bx, ay - by);
        const Scalar loss = pathloss_db(config.pathloss_params, dist, kind) +
                            config.shadowing_sigma_db * rng.normal();
        return db_to_linear(-loss);
    };

    draw.cu_gain_raw.resize(n, m);
    for (int sc = 0; sc < n; ++sc) {
        for (int i = 0; i < m; ++i) {
            draw.cu_gain_raw(sc, i) =
                link_gain(0.0, 0.0, draw.cu_x(sc, i), draw.cu_y(sc, i), LinkKind::bs_to_node);
        }
    }
    draw.cross_gain_raw.assign(n, ArrayXX(k, m));
    for (int sc = 0; sc < n; ++sc) {
        for (int p = 0; p < k; ++p) {
            for (int i = 0; i < m; ++i) {
                draw.cross_gain_raw[sc](p, i) =
                    link_gain(draw.d2d_tx_x[p], draw.d2d_tx_y[p], draw.cu_x(sc, i), draw.cu_y(sc, i),
                              LinkKind::node_to_node);
            }
        }
    }
    // Large-scale gains are frequency flat: one draw per physical link,
    // replicated across subchannels.
    draw.d2d_gain.resize(n, k);
    draw.bs_to_d2d_gain.resize(n, k);
    for (int p = 0; p < k; ++p) {
        const Scalar gd = link_gain(draw.d2d_tx_x[p], draw.d2d_tx_y[p], draw.d2d_rx_x[p],
                                    draw.d2d_rx_y[p], LinkKind::node_to_node);
        const Scalar gb = link_gain(0.0, 0.0, draw.d2d_rx_x[p], draw.d2d_rx_y[p], LinkKind::bs_to_node);
        draw.d2d_gain.col(p).setConstant(gd);
        draw.bs_to_d2d_gain.col(p).setConstant(gb);
    }
    return draw;
}

ChannelRealization sort_realization(const ScenarioDraw& draw) {
    const int n = static_cast<int>(draw.cu_gain_raw.rows());
    const int m = static_cast<int>(draw.cu_gain_raw.cols());
    const int k = static_cast<int>(draw.d2d_gain.cols());

    ChannelRealization out;
    out.seed_used = draw.seed_used;
    out.cu_gain.resize(n, m);
    out.cross_gain.assign(n, ArrayXX(k, m));
    out.d2d_gain = draw.d2d_gain;
    out.bs_to_d2d_gain = draw.bs_to_d2d_gain;
    for (int sc = 0; sc < n; ++sc) {
        const SortedGains sorted = order_cus(draw.cu_gain_raw.row(sc).transpose());
        for (int i = 0; i < m; ++i) {
            out.cu_gain(sc, i) = sorted.gains[i];
            out.cross_gain[sc].col(i) = draw.cross_gain_raw[sc].col(sorted.permutation[i]);
        }
    }
    out.validate();
    return out;
}

ChannelRealization generate_scenario(const ScenarioConfig& config) {
    return sort_realization(draw_scenario(config));
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
        throw IoError(std::string("realization json: ") + name + " must be a 2-d array");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    ArrayXX out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw IoError(std::string("realization json: ragged rows in ") + name);
        }
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = j[r][c].get<Scalar>();
    }
    return out;
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["n_subchannels"] = c.n_subchannels;
    j["cus_per_sc"] = c.cus_per_sc;
    j["n_d2d_pairs"] = c.n_d2d_pairs;
    j["p_c_max_dbm"] = c.p_c_max_dbm;
    j["p_d_max_dbm"] = c.p_d_max_dbm;
    j["noise_power_dbm"] = c.noise_power_dbm;
    j["gamma"] = array_to_json(c.gamma);
    j["cell_side_m"] = c.cell_side_m;
    j["d2d_max_dist_m"] = c.d2d_max_dist_m;
    j["pathloss_carrier_mhz"] = c.pathloss_params.carrier_mhz;
    j["pathloss_bs_height_m"] = c.pathloss_params.bs_height_m;
    j["pathloss_mobile_height_m"] = c.pathloss_params.mobile_height_m;
    j["shadowing_sigma_db"] = c.shadowing_sigma_db;
    j["seed"] = c.seed;
    return j;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    c.n_subchannels = j.at("n_subchannels").get<int>();
    c.cus_per_sc = j.at("cus_per_sc").get<int>();
    c.n_d2d_pairs = j.at("n_d2d_pairs").get<int>();
    c.p_c_max_dbm = j.at("p_c_max_dbm").get<Scalar>();
    c.p_d_max_dbm = j.at("p_d_max_dbm").get<Scalar>();
    c.noise_power_dbm = j.at("noise_power_dbm").get<Scalar>();
    c.gamma = array_from_json(j.at("gamma"), "gamma");
    c.cell_side_m = j.at("cell_side_m").get<Scalar>();
    c.d2d_max_dist_m = j.at("d2d_max_dist_m").get<Scalar>();
    c.pathloss_params.carrier_mhz = j.at("pathloss_carrier_mhz").get<Scalar>();
    c.pathloss_params.bs_height_m = j.at("pathloss_bs_height_m").get<Scalar>();
    c.pathloss_params.mobile_height_m = j.at("pathloss_mobile_height_m").get<Scalar>();
    c.shadowing_sigma_db = j.at("shadowing_sigma_db").get<Scalar>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string realization_to_json(const ChannelRealization& realization, const ScenarioConfig& config) {
    json j;
    j["format"] = "nomad2d.realization.v1";
    j["config"] = config_to_json(config);
    j["seed_used"] = realization.seed_used;
    j["cu_gain"] = array_to_json(realization.cu_gain);
    json cross = json::array();
    for (const auto& block : realization.cross_gain) cross.push_back(array_to_json(block));
    j["cross_gain"] = std::move(cross);
    j["d2d_gain"] = array_to_json(realization.d2d_gain);
    j["bs_to_d2d_gain"] = array_to_json(realization.bs_to_d2d_gain);
    return j.dump(2) + "\n";
}

RealizationFile realization_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("realization json: parse failed: ") + e.what());
    }
    RealizationFile out;
    try {
        out.config = config_from_json(j.at("config"));
        out.realization.seed_used = j.at("seed_used").get<std::uint64_t>();
        out.realization.cu_gain = array_from_json(j.at("cu_gain"), "cu_gain");
        const auto& cross = j.at("cross_gain");
        if (!cross.is_array()) throw IoError("realization json: cross_gain must be an array");
        out.realization.cross_gain.clear();
        for (const auto& block : cross) {
            out.realization.cross_gain.push_back(array_from_json(block, "cross_gain"));
        }
        out.realization.d2d_gain = array_from_json(j.at("d2d_gain"), "d2d_gain");
        out.realization.bs_to_d2d_gain = array_from_json(j.at("bs_to_d2d_gain"), "bs_to_d2d_gain");
    } catch (const json::exception& e) {
        throw IoError(std::string("realization json: missing or invalid field: ") + e.what());
    }
    out.config.validate();
    out.realization.validate();
    if (out.realization.n_sc() != out.config.n_subchannels ||
        out.realization.n_cu() != out.config.cus_per_sc ||
        out.realization.n_pairs() != out.config.n_d2d_pairs) {
        throw ConfigError("realization: gain shapes do not match the config echo");
    }
    return out;
}

}  // namespace nomad2d
