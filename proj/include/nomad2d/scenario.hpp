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

#include <nomad2d/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nomad2d {

enum class LinkKind { bs_to_node, node_to_node };

/// Okumura-Hata constants (urban, small/medium-city mobile correction).
/// Node-to-node links reuse the formula with both antennas at mobile height.
struct PathLossParams {
    Scalar carrier_mhz = 900.0;
    Scalar bs_height_m = 30.0;
    Scalar mobile_height_m = 1.5;

    /// Loss in dB at the 1 km reference distance for the given link kind.
    Scalar intercept_db(LinkKind kind) const;
    /// Loss slope in dB per decade of distance (km).
    Scalar slope_db_per_decade(LinkKind kind) const;
};

/// Path loss in dB at distance_m; deterministic, monotone non-decreasing in
/// distance. Throws std::domain_error for non-positive distances.
Scalar pathloss_db(const PathLossParams& params, Scalar distance_m, LinkKind kind);

struct ScenarioConfig {
    int n_subchannels = 30;       // N
    int cus_per_sc = 2;           // M
    int n_d2d_pairs = 10;         // K
    Scalar p_c_max_dbm = 35.0;    // BS budget per SC
    Scalar p_d_max_dbm = 25.0;    // per-pair total budget
    Scalar noise_power_dbm = -114.0;
    ArrayXX gamma;                // (N x M) rate requirements, bits/s/Hz
    Scalar cell_side_m = 500.0;
    Scalar d2d_max_dist_m = 30.0;
    PathLossParams pathloss_params;
    Scalar shadowing_sigma_db = 4.0;
    std::uint64_t seed = 1;

    Scalar p_c_max_w() const { return dbm_to_watt(p_c_max_dbm); }
    Scalar p_d_max_w() const { return dbm_to_watt(p_d_max_dbm); }
    Scalar noise_w() const { return dbm_to_watt(noise_power_dbm); }

    /// Fills gamma with a uniform requirement; resizes to (N x M).
    void set_uniform_gamma(Scalar gamma_th);

    /// Throws ConfigError naming the first violated field.
    void validate() const;
};

/// All linear power gains of one network draw, CUs sorted per SC so that
/// cu_gain(n, 0) <= ... <= cu_gain(n, M-1).
struct ChannelRealization {
    ArrayXX cu_gain;                  // (N x M)
    std::vector<ArrayXX> cross_gain;  // per SC: (K x M), D2D tx k -> CU i
    ArrayXX d2d_gain;                 // (N x K), tx -> rx of pair k
    ArrayXX bs_to_d2d_gain;           // (N x K), BS -> rx of pair k
    std::uint64_t seed_used = 0;

    int n_sc() const { return static_cast<int>(cu_gain.rows()); }
    int n_cu() const { return static_cast<int>(cu_gain.cols()); }
    int n_pairs() const { return static_cast<int>(d2d_gain.cols()); }

    /// Shape/positivity/sortedness checks; throws ConfigError.
    void validate() const;
};

/// Node placement and pre-sort gains of a draw; exposed so the sorting step
/// and the shadowing statistics can be checked against the raw sample.
struct ScenarioDraw {
    ArrayXX cu_x, cu_y;          // (N x M) CU positions, BS at origin
    ArrayX d2d_tx_x, d2d_tx_y;   // (K)
    ArrayX d2d_rx_x, d2d_rx_y;   // (K)
    ArrayXX cu_gain_raw;         // (N x M), unsorted
    std::vector<ArrayXX> cross_gain_raw;
    ArrayXX d2d_gain;            // (N x K)
    ArrayXX bs_to_d2d_gain;      // (N x K)
    std::uint64_t seed_used = 0;
};

struct SortedGains {
    std::vector<int> permutation;  // sorted position -> original index
    ArrayX gains;                  // ascending
};

/// Stable ascending sort of one SC's CU gains; ties keep original order.
SortedGains order_cus(ConstArrayRef raw_gains);

/// Uniform node placement plus path loss and log-normal shadowing, before
/// the per-SC SIC relabeling.
ScenarioDraw draw_scenario(const ScenarioConfig& config);

/// draw_scenario followed by per-SC ascending relabeling of CU and cross
/// gains. Deterministic in (config, seed).
ChannelRealization generate_scenario(const ScenarioConfig& config);

/// Applies the per-SC sort to a raw draw.
ChannelRealization sort_realization(const ScenarioDraw& draw);

/// JSON document with the realization gains (lossless round-trip) and a
/// config echo; schema documented in the README.
std::string realization_to_json(const ChannelRealization& realization, const ScenarioConfig& config);

struct RealizationFile {
    ScenarioConfig config;
    ChannelRealization realization;
};

/// Parses and validates a document produced by realization_to_json.
/// Throws IoError on malformed JSON, ConfigError on invariant violations.
RealizationFile realization_from_json(const std::string& text);

}  // namespace nomad2d
