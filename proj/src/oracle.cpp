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

#include <nomad2d/oracle.hpp>

#include <json.hpp>

#include <cmath>
#include <functional>
#include <unordered_map>

namespace nomad2d {

namespace {

void check_shapes(const Allocation& alloc, const ChannelRealization& realization,
                  const ScenarioConfig& config) {
    if (alloc.n_sc() != realization.n_sc() || alloc.d2d_power.rows() != realization.n_sc() ||
        alloc.d2d_power.cols() != realization.n_pairs() ||
        alloc.cu_power.rows() != realization.n_sc() || alloc.cu_power.cols() != realization.n_cu() ||
        alloc.d2d_rates.size() != realization.n_sc()) {
        throw ConfigError("allocation: shape mismatch with realization");
    }
    if (realization.n_sc() != config.n_subchannels || realization.n_cu() != config.cus_per_sc ||
        realization.n_pairs() != config.n_d2d_pairs) {
        throw ConfigError("realization: shape mismatch with config");
    }
}

}  // namespace

Scalar cu_sinr_direct(int n, int i, int j, ConstArrayRef cu_power_row, const Allocation& alloc,
                      const ChannelRealization& realization, Scalar noise_w) {
    const int m = realization.n_cu();
    if (n < 0 || n >= realization.n_sc() || i < 0 || i >= m || j < 0 || j > i) {
        throw std::out_of_range("cu_sinr_direct: index out of range");
    }
    const Scalar own_gain = realization.cu_gain(n, i);
    Scalar interference = 0.0;
    for (int t = j + 1; t < m; ++t) interference += cu_power_row[t];
    interference *= own_gain;
    for (int k = 0; k < realization.n_pairs(); ++k) {
        interference += alloc.d2d_power(n, k) * realization.cross_gain[n](k, i);
    }
    return cu_power_row[j] * own_gain / (interference + noise_w);
}

FeasibilityReport verify_feasible(const Allocation& alloc, const ChannelRealization& realization,
                                  const ScenarioConfig& config, VerifyTolerances tol) {
    check_shapes(alloc, realization, config);
    const int n = realization.n_sc();
    const int m = realization.n_cu();
    const int k = realization.n_pairs();
    const Scalar noise_w = config.noise_w();

    FeasibilityReport rep;
    rep.tol = tol;
    rep.sic_adjacent_margin.resize(n);
    rep.sic_pairwise_margin.resize(n);
    rep.cu_rate_margin.resize(n, m);
    rep.exclusivity.assign(n, true);
    rep.sic_adjacent_ok = rep.sic_pairwise_ok = rep.cu_rate_ok = true;
    rep.exclusivity_ok = true;

    // Normalized interference-plus-noise per decoding position; the SIC order
    // holds when it is non-increasing along positions.
    for (int sc = 0; sc < n; ++sc) {
        ArrayX level(m);
        for (int i = 0; i < m; ++i) {
            Scalar d2d = 0.0;
            for (int p = 0; p < k; ++p) {
                d2d += alloc.d2d_power(sc, p) * realization.cross_gain[sc](p, i);
            }
            level[i] = (d2d + noise_w) / realization.cu_gain(sc, i);
        }
        rep.sic_adjacent_margin[sc].resize(std::max(0, m - 1));
        for (int i = 0; i + 1 < m; ++i) {
            const Scalar margin = level[i] - level[i + 1];
            rep.sic_adjacent_margin[sc][i] = margin;
            if (margin < -tol.power_abs) rep.sic_adjacent_ok = false;
        }
        rep.sic_pairwise_margin[sc].resize(m * (m - 1) / 2);
        int idx = 0;
        for (int i = 1; i < m; ++i) {
            for (int j = 0; j < i; ++j) {
                const Scalar margin = level[j] - level[i];
                rep.sic_pairwise_margin[sc][idx++] = margin;
                if (margin < -tol.power_abs) rep.sic_pairwise_ok = false;
            }
        }
        for (int i = 0; i < m; ++i) {
            const Scalar sinr =
                cu_sinr_direct(sc, i, i, alloc.cu_power.row(sc).transpose(), alloc, realization, noise_w);
            const Scalar achieved = std::log2(1.0 + sinr);
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
        const Scalar sinr = alloc.d2d_power(sc, owner) * realization.d2d_gain(sc, owner) /
                            (realization.bs_to_d2d_gain(sc, owner) * alloc.cu_power.row(sc).sum() +
                             noise_w);
        rep.objective_direct += std::log2(1.0 + sinr);
    }
    rep.objective_consistent =
        std::abs(rep.objective_direct - rep.objective_stated) <=
        tol.rate_rel * std::max({std::abs(rep.objective_direct), std::abs(rep.objective_stated), 1.0});

    rep.overall = rep.sic_adjacent_ok && rep.sic_pairwise_ok && rep.cu_rate_ok && rep.d2d_budget_ok &&
                  rep.bs_budget_ok && rep.exclusivity_ok && rep.objective_consistent;
    return rep;
}

std::string report_to_json(const FeasibilityReport& rep) {
    using json = nlohmann::ordered_json;
    const auto vec = [](const ArrayX& a) {
        json out = json::array();
        for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i]);
        return out;
    };
    json j;
    j["overall"] = rep.overall;
    j["tolerances"] = {{"rate_rel", rep.tol.rate_rel}, {"power_abs_w", rep.tol.power_abs}};
    json sic;
    sic["adjacent_ok"] = rep.sic_adjacent_ok;
    sic["pairwise_ok"] = rep.sic_pairwise_ok;
    json adj = json::array(), pw = json::array();
    for (const auto& row : rep.sic_adjacent_margin) adj.push_back(vec(row));
    for (const auto& row : rep.sic_pairwise_margin) pw.push_back(vec(row));
    sic["adjacent_margin_w"] = std::move(adj);
    sic["pairwise_margin_w"] = std::move(pw);
    j["sic_order"] = std::move(sic);
    json cu;
    cu["ok"] = rep.cu_rate_ok;
    json margins = json::array();
    for (Eigen::Index r = 0; r < rep.cu_rate_margin.rows(); ++r) {
        margins.push_back(vec(rep.cu_rate_margin.row(r).transpose()));
    }
    cu["margin_bps_hz"] = std::move(margins);
    j["cu_rate"] = std::move(cu);
    j["d2d_budget"] = {{"ok", rep.d2d_budget_ok}, {"slack_w", vec(rep.d2d_budget_slack)}};
    j["bs_budget"] = {{"ok", rep.bs_budget_ok}, {"slack_w", vec(rep.bs_budget_slack)}};
    json excl;
    excl["ok"] = rep.exclusivity_ok;
    json per_sc = json::array();
    for (bool ok : rep.exclusivity) per_sc.push_back(ok);
    excl["per_sc"] = std::move(per_sc);
    j["exclusivity"] = std::move(excl);
    j["objective"] = {{"stated", rep.objective_stated},
                      {"direct", rep.objective_direct},
                      {"consistent", rep.objective_consistent}};
    return j.dump(2) + "\n";
}

namespace {

/// Separable concave subproblem of one pair on a set of owned SCs:
/// maximize the summed rate over a box grid under the total-power budget.
struct PairGridSolver {
    const ChannelRealization& realization;
    const CoefficientSet& coeffs;
    Scalar noise_w;
    Scalar p_d_max_w;
    int grid_points;
    long long* nodes_left;  // shared work bound across the whole enumeration

    Scalar rate_direct(int sc, int pair, Scalar q) const {
        const Scalar cu_sum = cumulative_power(0, q, coeffs.xi[sc].row(pair).transpose(),
                                               coeffs.delta.row(sc).transpose(),
                                               coeffs.gamma.row(sc).transpose());
        const Scalar sinr = q * realization.d2d_gain(sc, pair) /
                            (realization.bs_to_d2d_gain(sc, pair) * cu_sum + noise_w);
        return std::log2(1.0 + sinr);
    }

    Scalar upper_bound(int sc, int pair) const {
        const Scalar cap = coeffs.q_cap(sc, pair);
        return is_unbounded(cap) ? p_d_max_w : std::min(cap, p_d_max_w);
    }

    struct Best {
        Scalar value = 0.0;
        std::vector<Scalar> q;
    };

    /// Exhaustive search over per-dimension value lists subject to the budget.
    Best search(const std::vector<std::vector<Scalar>>& values,
                const std::vector<std::vector<Scalar>>& rates) const {
        const int dims = static_cast<int>(values.size());
        Best best;
        best.q.assign(dims, 0.0);
        std::vector<Scalar> current(dims, 0.0);
        std::function<void(int, Scalar, Scalar)> recurse = [&](int dim, Scalar used, Scalar value) {
            if (dim == dims) {
                if (value > best.value) {
                    best.value = value;
                    best.q = current;
                }
                return;
            }
            for (std::size_t idx = 0; idx < values[dim].size(); ++idx) {
                if (--*nodes_left < 0) {
                    throw InstanceSizeError(
                        "brute_force: grid enumeration exceeds the work bound; reduce "
                        "grid_points or the instance size");
                }
                const Scalar q = values[dim][idx];
                if (used + q > p_d_max_w) break;  // values ascend
                current[dim] = q;
                recurse(dim + 1, used + q, value + rates[dim][idx]);
            }
        };
        recurse(0, 0.0, 0.0);
        return best;
    }

    Best solve(int pair, const std::vector<int>& owned) const {
        std::vector<int> dims_sc;
        std::vector<Scalar> ub;
        for (int sc : owned) {
            const Scalar bound = upper_bound(sc, pair);
            if (bound > 0.0) {
                dims_sc.push_back(sc);
                ub.push_back(bound);
            }
        }
        const int dims = static_cast<int>(dims_sc.size());
        Best best;
        if (dims == 0) {
            best.q.assign(0, 0.0);
        } else {
            std::vector<std::vector<Scalar>> values(dims), rates(dims);
            for (int d = 0; d < dims; ++d) {
                const Scalar step = ub[d] / grid_points;
                values[d].resize(grid_points + 1);
                rates[d].resize(grid_points + 1);
                for (int j = 0; j <= grid_points; ++j) {
                    values[d][j] = j * step;
                    rates[d][j] = rate_direct(dims_sc[d], pair, values[d][j]);
                }
            }
            best = search(values, rates);

            // One refinement pass: the winning cell re-gridded at 10x.
            std::vector<std::vector<Scalar>> fine_values(dims), fine_rates(dims);
            for (int d = 0; d < dims; ++d) {
                const Scalar step = ub[d] / grid_points;
                const Scalar lo = std::max(0.0, best.q[d] - step);
                const Scalar hi = std::min(ub[d], best.q[d] + step);
                const int fine_n = 20;
                const Scalar fine_step = (hi - lo) / fine_n;
                for (int j = 0; j <= fine_n; ++j) {
                    const Scalar q = lo + j * fine_step;
                    fine_values[d].push_back(q);
                    fine_rates[d].push_back(rate_direct(dims_sc[d], pair, q));
                }
            }
            const Best refined = search(fine_values, fine_rates);
            if (refined.value > best.value) best = refined;

            // The grid rarely lands exactly on the budget simplex; pour any
            // remaining budget into the steepest non-capped dimensions.
            Scalar slack = p_d_max_w;
            for (Scalar q : best.q) slack -= q;
            if (slack > 0.0) {
                Best topped = best;
                for (int round = 0; round < dims && slack > 0.0; ++round) {
                    int steepest = -1;
                    Scalar steepest_gain = 0.0;
                    for (int d = 0; d < dims; ++d) {
                        const Scalar headroom = std::min(slack, ub[d] - topped.q[d]);
                        if (headroom <= 0.0) continue;
                        const Scalar gain = rate_direct(dims_sc[d], pair, topped.q[d] + headroom) -
                                            rate_direct(dims_sc[d], pair, topped.q[d]);
                        if (gain > steepest_gain) {
                            steepest_gain = gain;
                            steepest = d;
                        }
                    }
                    if (steepest < 0) break;
                    const Scalar add = std::min(slack, ub[steepest] - topped.q[steepest]);
                    topped.q[steepest] += add;
                    slack -= add;
                }
                topped.value = 0.0;
                for (int d = 0; d < dims; ++d) {
                    topped.value += rate_direct(dims_sc[d], pair, topped.q[d]);
                }
                if (topped.value > best.value) best = topped;
            }
        }
        // Re-expand to the owned-SC order with zeros for capped-out SCs.
        Best out;
        out.value = best.value;
        out.q.assign(owned.size(), 0.0);
        for (int d = 0; d < dims; ++d) {
            const auto pos = std::find(owned.begin(), owned.end(), dims_sc[d]) - owned.begin();
            out.q[pos] = best.q[d];
        }
        return out;
    }
};

}  // namespace

Allocation brute_force(const ChannelRealization& realization, const ScenarioConfig& config,
                       int grid_points) {
    config.validate();
    realization.validate();
    if (grid_points < 50) throw ConfigError("grid_points: must be >= 50");
    const int n = realization.n_sc();
    const int m = realization.n_cu();
    const int k = realization.n_pairs();
    const Scalar maps = std::pow(static_cast<Scalar>(k + 1), n);
    if (maps > 1e5) {
        throw InstanceSizeError("brute_force: (K+1)^N with K=" + std::to_string(k) +
                                ", N=" + std::to_string(n) + " exceeds the 1e5 enumeration bound");
    }

    const CoefficientSet coeffs = build_coefficients(realization, config);
    long long nodes_left = 200'000'000;
    const PairGridSolver solver{realization, coeffs,      config.noise_w(),
                                config.p_d_max_w(), grid_points, &nodes_left};

    // Memoized per-(pair, owned-set) optima.
    std::unordered_map<long long, PairGridSolver::Best> memo;
    const auto solve_subset = [&](int pair, unsigned mask) -> const PairGridSolver::Best& {
        const long long key = static_cast<long long>(pair) << n | mask;
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        std::vector<int> owned;
        for (int sc = 0; sc < n; ++sc) {
            if (mask & (1u << sc)) owned.push_back(sc);
        }
        return memo.emplace(key, solver.solve(pair, owned)).first->second;
    };

    std::vector<int> best_map(n, -1);
    Scalar best_value = 0.0;
    std::vector<int> owner(n, -1);
    const long long total = static_cast<long long>(maps + 0.5);
    for (long long code = 0; code < total; ++code) {
        long long rem = code;
        std::vector<unsigned> masks(k, 0);
        for (int sc = 0; sc < n; ++sc) {
            const int who = static_cast<int>(rem % (k + 1)) - 1;
            rem /= (k + 1);
            owner[sc] = who;
            if (who >= 0) masks[who] |= 1u << sc;
        }
        Scalar value = 0.0;
        for (int p = 0; p < k; ++p) {
            if (masks[p]) value += solve_subset(p, masks[p]).value;
        }
        if (value > best_value) {
            best_value = value;
            best_map = owner;
        }
    }

    Allocation alloc;
    alloc.assignment.assign(n, -1);
    alloc.d2d_power = ArrayXX::Zero(n, k);
    alloc.d2d_rates = ArrayX::Zero(n);
    alloc.cu_power.resize(n, m);
    std::vector<unsigned> best_masks(k, 0);
    for (int sc = 0; sc < n; ++sc) {
        if (best_map[sc] >= 0) best_masks[best_map[sc]] |= 1u << sc;
    }
    for (int p = 0; p < k; ++p) {
        if (!best_masks[p]) continue;
        std::vector<int> owned;
        for (int sc = 0; sc < n; ++sc) {
            if (best_masks[p] & (1u << sc)) owned.push_back(sc);
        }
        const auto& sol = solve_subset(p, best_masks[p]);
        for (std::size_t d = 0; d < owned.size(); ++d) {
            if (sol.q[d] > 0.0) {
                alloc.assignment[owned[d]] = p;
                alloc.d2d_power(owned[d], p) = sol.q[d];
                alloc.d2d_rates[owned[d]] = solver.rate_direct(owned[d], p, sol.q[d]);
            }
        }
    }
    for (int sc = 0; sc < n; ++sc) {
        const int who = alloc.assignment[sc];
        const Scalar q = who >= 0 ? alloc.d2d_power(sc, who) : 0.0;
        const int xi_row = who >= 0 ? who : 0;
        alloc.cu_power.row(sc) = cu_powers(q, coeffs.xi[sc].row(xi_row).transpose(),
                                           coeffs.delta.row(sc).transpose(),
                                           coeffs.gamma.row(sc).transpose())
                                     .transpose();
    }
    alloc.objective = alloc.d2d_rates.sum();
    return alloc;
}

}  // namespace nomad2d
