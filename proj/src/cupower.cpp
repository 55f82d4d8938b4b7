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

#include <nomad2d/cupower.hpp>

#include <cmath>

namespace nomad2d {

std::pair<ArrayXX, ArrayX> compute_xi_delta(const ArrayXX& cross_gain_sc, ConstArrayRef cu_gain_sc,
                                            Scalar noise_w) {
    if ((cu_gain_sc <= 0.0).any() || (cross_gain_sc <= 0.0).any()) {
        throw std::domain_error("compute_xi_delta: gains must be positive");
    }
    if (!(noise_w > 0.0)) throw std::domain_error("compute_xi_delta: noise must be positive");
    ArrayXX xi = cross_gain_sc.rowwise() / cu_gain_sc.transpose();
    ArrayX delta = noise_w / cu_gain_sc;
    return {std::move(xi), std::move(delta)};
}

ArrayX gamma_coefficients(ConstArrayRef gamma_row) {
    if ((gamma_row < 0.0).any()) {
        throw std::domain_error("gamma_coefficients: rate requirements must be >= 0");
    }
    const int m = static_cast<int>(gamma_row.size());
    ArrayX out(m);
    Scalar prefix = 1.0;  // 2^(empty sum)
    for (int j = 0; j < m; ++j) {
        out[j] = prefix * (std::exp2(gamma_row[j]) - 1.0);
        prefix *= std::exp2(gamma_row[j]);
    }
    return out;
}

Scalar cumulative_power(int first_pos, Scalar q_w, ConstArrayRef xi_col, ConstArrayRef delta_row,
                        ConstArrayRef gamma_row) {
    const int m = static_cast<int>(gamma_row.size());
    if (first_pos < 0 || first_pos >= m) {
        throw std::out_of_range("cumulative_power: position out of range");
    }
    Scalar sum = 0.0;
    Scalar prefix = 1.0;  // 2^(empty sum)
    for (int pos = first_pos; pos < m; ++pos) {
        sum += prefix * (std::exp2(gamma_row[pos]) - 1.0) * (q_w * xi_col[pos] + delta_row[pos]);
        prefix *= std::exp2(gamma_row[pos]);
    }
    return sum;
}

ArrayX cu_powers(Scalar q_w, ConstArrayRef xi_col, ConstArrayRef delta_row, ConstArrayRef gamma_row) {
    const int m = static_cast<int>(gamma_row.size());
    ArrayX p(m);
    Scalar tail = 0.0;  // power sum of positions above the current one
    for (int pos = m - 1; pos >= 0; --pos) {
        const Scalar here = cumulative_power(pos, q_w, xi_col, delta_row, gamma_row);
        p[pos] = here - tail;
        tail = here;
    }
    return p;
}

Scalar q_cap_budget(ConstArrayRef xi_col, ConstArrayRef delta_row, ConstArrayRef big_gamma_row,
                    Scalar p_c_max_w) {
    const Scalar denom = (big_gamma_row * xi_col).sum();
    if (denom <= 0.0) return kUnbounded;  // zero-rate CUs: no power needed for any q
    const Scalar headroom = p_c_max_w - (big_gamma_row * delta_row).sum();
    return std::max(0.0, headroom / denom);
}

Scalar q_cap_sic(ConstArrayRef xi_col, ConstArrayRef delta_row) {
    const int m = static_cast<int>(xi_col.size());
    Scalar cap = kUnbounded;
    for (int i = 0; i + 1 < m; ++i) {
        if (xi_col[i] < xi_col[i + 1]) {
            cap = std::min(cap, (delta_row[i + 1] - delta_row[i]) / (xi_col[i] - xi_col[i + 1]));
        }
    }
    return cap;
}

Scalar q_cap_total(Scalar budget_cap, Scalar sic_cap) {
    if (is_unbounded(budget_cap) && is_unbounded(sic_cap)) return kUnbounded;
    if (is_unbounded(budget_cap)) return std::max(0.0, sic_cap);
    if (is_unbounded(sic_cap)) return budget_cap;
    return std::min(budget_cap, std::max(0.0, sic_cap));
}

D2dRateCoeffs d2d_rate_coeffs(Scalar d2d_gain, Scalar bs_to_d2d_gain, ConstArrayRef big_gamma_row,
                              ConstArrayRef xi_col, ConstArrayRef delta_row, Scalar noise_w) {
    if (!(d2d_gain > 0.0) || !(bs_to_d2d_gain > 0.0)) {
        throw std::domain_error("d2d_rate_coeffs: gains must be positive");
    }
    D2dRateCoeffs out;
    const Scalar gain_sum = (big_gamma_row * xi_col).sum();
    if (gain_sum <= 0.0) {
        // Zero-rate CUs transmit nothing: the D2D link sees noise only.
        out.cu_idle = true;
        out.d = d2d_gain / noise_w;
        out.e = kUnbounded;
        return out;
    }
    const Scalar base_sum = (big_gamma_row * delta_row).sum();
    out.d = d2d_gain / (bs_to_d2d_gain * gain_sum);
    out.e = (bs_to_d2d_gain * base_sum + noise_w) / (bs_to_d2d_gain * gain_sum);
    return out;
}

Scalar d2d_rate(Scalar q_w, Scalar d, Scalar e) {
    // log2(1 + d q / (q + e)) written with a single division.
    return std::log2((q_w * (1.0 + d) + e) / (q_w + e));
}

Scalar d2d_rate_derivative(Scalar q_w, Scalar d, Scalar e) {
    return d * e / (M_LN2 * (q_w + e) * ((1.0 + d) * q_w + e));
}

Scalar d2d_rate_linear(Scalar q_w, Scalar slope) { return std::log2(1.0 + slope * q_w); }

Scalar d2d_rate_linear_derivative(Scalar q_w, Scalar slope) {
    return slope / (M_LN2 * (1.0 + slope * q_w));
}

CoefficientSet build_coefficients(const ChannelRealization& realization, const ArrayXX& gamma,
                                  Scalar noise_w, Scalar p_c_max_w) {
    const int n = realization.n_sc();
    const int m = realization.n_cu();
    const int k = realization.n_pairs();
    if (gamma.rows() != n || gamma.cols() != m) {
        throw ConfigError("gamma: must be an n_subchannels x cus_per_sc matrix");
    }

    CoefficientSet cs;
    cs.xi.reserve(n);
    cs.delta.resize(n, m);
    cs.big_gamma.resize(n, m);
    cs.gamma = gamma;
    cs.cu_base_power.resize(n);
    cs.d.resize(n, k);
    cs.e.resize(n, k);
    cs.q_cap.resize(n, k);
    cs.cu_idle.resize(n);

    for (int sc = 0; sc < n; ++sc) {
        auto [xi, delta] = compute_xi_delta(realization.cross_gain[sc],
                                            realization.cu_gain.row(sc).transpose(), noise_w);
        const ArrayX gammas = gamma_coefficients(gamma.row(sc).transpose());
        cs.delta.row(sc) = delta.transpose();
        cs.big_gamma.row(sc) = gammas.transpose();
        cs.cu_base_power[sc] = (gammas * delta).sum();
        cs.cu_idle[sc] = (gammas <= 0.0).all();
        for (int p = 0; p < k; ++p) {
            const ArrayX xi_col = xi.row(p).transpose();
            const Scalar budget = q_cap_budget(xi_col, delta, gammas, p_c_max_w);
            const Scalar sic = q_cap_sic(xi_col, delta);
            cs.q_cap(sc, p) = q_cap_total(budget, sic);
            const D2dRateCoeffs rc =
                d2d_rate_coeffs(realization.d2d_gain(sc, p), realization.bs_to_d2d_gain(sc, p),
                                gammas, xi_col, delta, noise_w);
            cs.d(sc, p) = rc.d;
            cs.e(sc, p) = rc.e;
        }
        cs.xi.push_back(std::move(xi));
    }
    return cs;
}

}  // namespace nomad2d
