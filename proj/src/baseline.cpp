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

#include <nomad2d/baseline.hpp>

#include <cmath>

namespace nomad2d {

Scalar ofdma_cu_power(Scalar q_w, int n, int i, int k, const ChannelRealization& realization,
                      Scalar gamma_ni, Scalar noise_w) {
    const int m = realization.n_cu();
    const Scalar coef = std::exp2(m * gamma_ni) - 1.0;
    const Scalar interference = q_w * realization.cross_gain[n](k, i) + noise_w / m;
    return coef * interference / realization.cu_gain(n, i);
}

Scalar ofdma_d2d_rate(Scalar q_w, int n, int k, const ChannelRealization& realization,
                      ConstArrayRef cu_power_row, Scalar noise_w) {
    const Scalar sinr = q_w * realization.d2d_gain(n, k) /
                        (realization.bs_to_d2d_gain(n, k) * cu_power_row.sum() + noise_w);
    return std::log2(1.0 + sinr);
}

OfdmaCoefficients build_ofdma_coefficients(const ChannelRealization& realization, const ArrayXX& gamma,
                                           Scalar noise_w, Scalar p_c_max_w) {
    const int n = realization.n_sc();
    const int m = realization.n_cu();
    const int k = realization.n_pairs();
    if (gamma.rows() != n || gamma.cols() != m) {
        throw ConfigError("gamma: must be an n_subchannels x cus_per_sc matrix");
    }

    OfdmaCoefficients oc;
    oc.power_slope.reserve(n);
    oc.power_base.resize(n, m);
    oc.d.resize(n, k);
    oc.e.resize(n, k);
    oc.q_cap.resize(n, k);
    oc.cu_idle.resize(n);

    for (int sc = 0; sc < n; ++sc) {
        ArrayX coef(m);
        for (int i = 0; i < m; ++i) coef[i] = std::exp2(m * gamma(sc, i)) - 1.0;
        oc.cu_idle[sc] = (coef <= 0.0).all();
        const ArrayX cu_gain_row = realization.cu_gain.row(sc).transpose();
        oc.power_base.row(sc) = (coef * (noise_w / m) / cu_gain_row).transpose();
        const Scalar base_sum = oc.power_base.row(sc).sum();

        ArrayXX slope(k, m);
        for (int p = 0; p < k; ++p) {
            slope.row(p) = coef.transpose() * realization.cross_gain[sc].row(p) /
                           cu_gain_row.transpose();
            const Scalar gain_sum = slope.row(p).sum();
            const Scalar g = realization.d2d_gain(sc, p);
            const Scalar gb = realization.bs_to_d2d_gain(sc, p);
            if (oc.cu_idle[sc]) {
                oc.q_cap(sc, p) = kUnbounded;
                oc.d(sc, p) = g / noise_w;
                oc.e(sc, p) = kUnbounded;
            } else {
                oc.q_cap(sc, p) = std::max(0.0, (p_c_max_w - base_sum) / gain_sum);
                oc.d(sc, p) = g / (gb * gain_sum);
                oc.e(sc, p) = (gb * base_sum + noise_w) / (gb * gain_sum);
            }
        }
        oc.power_slope.push_back(std::move(slope));
    }
    return oc;
}

SolveResult ofdma_solve(const ChannelRealization& realization, const ScenarioConfig& config,
                        const SolverSettings& settings) {
    const OfdmaCoefficients oc = build_ofdma_coefficients(realization, config);
    LinkRateGrid grid{oc.d, oc.e, oc.q_cap, oc.cu_idle};
    CoreSolution core = solve_core(grid, config.p_d_max_w(), settings);

    const int n = realization.n_sc();
    Allocation alloc;
    alloc.assignment = std::move(core.assignment);
    alloc.d2d_power = std::move(core.d2d_power);
    alloc.d2d_rates = std::move(core.d2d_rates);
    alloc.objective = core.objective;
    alloc.cu_power.resize(n, realization.n_cu());
    for (int sc = 0; sc < n; ++sc) {
        const int owner = alloc.assignment[sc];
        const Scalar q = owner >= 0 ? alloc.d2d_power(sc, owner) : 0.0;
        const int slope_row = owner >= 0 ? owner : 0;
        alloc.cu_power.row(sc) = oc.power_slope[sc].row(slope_row) * q + oc.power_base.row(sc);
    }
    return SolveResult{std::move(alloc), std::move(core.dual), core.converged};
}

FeasibilityReport ofdma_verify_feasible(const Allocation& alloc, const ChannelRealization& realization,
                                        const ScenarioConfig& config, VerifyTolerances tol) {
    const int n = realization.n_sc();
    const int m = realization.n_cu();
    const int k = realization.n_pairs();
    const Scalar noise_w = config.noise_w();
    if (alloc.n_sc() != n || alloc.cu_power.cols() != m || alloc.d2d_power.cols() != k) {
        throw ConfigError("allocation: shape mismatch with realization");
    }

    FeasibilityReport rep;
    rep.tol = tol;
    // No decoding order exists across orthogonal subbands.
    rep.sic_adjacent_margin.assign(n, ArrayX::Zero(0));
    rep.sic_pairwise_margin.assign(n, ArrayX::Zero(0));
    rep.sic_adjacent_ok = rep.sic_pairwise_ok = true;
    rep.cu_rate_margin.resize(n, m);
    rep.cu_rate_ok = true;
    rep.exclusivity.assign(n, true);
    rep.exclusivity_ok = true;

    for (int sc = 0; sc < n; ++sc) {
        for (int i = 0; i < m; ++i) {
            Scalar d2d = 0.0;
            for (int p = 0; p < k; ++p) {
                d2d += alloc.d2d_power(sc, p) * realization.cross_gain[sc](p, i);
            }
            const Scalar sinr =
                alloc.cu_power(sc, i) * realization.cu_gain(sc, i) / (d2d + noise_w / m);
            const Scalar achieved = std::log2(1.0 + sinr) / m;
            const Scalar required = config.gamma(sc, i);
            rep.cu_rate_margin(sc, i) = achieved - required;
            if (achieved < required * (1.0 - tol.rate_rel)) rep.cu_rate_ok = false;
        }
        int transmitting = 0;
        bool consistent = true;
        for (int p = 0; p < k; ++p) {
            if (alloc.d2d_power(sc, p) > tol.power_abs) {
                ++transmitting;
                if (alloc.assignment[sc] != p) consistent = false;
            }
        }
        rep.exclusivity[sc] = transmitting <= 1 && consistent;
        if (!rep.exclusivity[sc]) rep.exclusivity_ok = false;
    }

    rep.d2d_budget_slack = config.p_d_max_w() - alloc.d2d_power.colwise().sum().transpose().array();
    rep.d2d_budget_ok = (rep.d2d_budget_slack >= -tol.power_abs).all();
    rep.bs_budget_slack = config.p_c_max_w() - alloc.cu_power.rowwise().sum().array();
    rep.bs_budget_ok = (rep.bs_budget_slack >= -tol.power_abs).all();

    rep.objective_stated = alloc.objective;
    rep.objective_direct = 0.0;
    for (int sc = 0; sc < n; ++sc) {
        const int owner = alloc.assignment[sc];
        if (owner < 0) continue;
        rep.objective_direct += ofdma_d2d_rate(alloc.d2d_power(sc, owner), sc, owner, realization,
                                               alloc.cu_power.row(sc).transpose(), noise_w);
    }
    rep.objective_consistent =
        std::abs(rep.objective_direct - rep.objective_stated) <=
        tol.rate_rel * std::max({std::abs(rep.objective_direct), std::abs(rep.objective_stated), 1.0});

    rep.overall = rep.cu_rate_ok && rep.d2d_budget_ok && rep.bs_budget_ok && rep.exclusivity_ok &&
                  rep.objective_consistent;
    return rep;
}

}  // namespace nomad2d
