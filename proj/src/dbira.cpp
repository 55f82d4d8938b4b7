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

#include <nomad2d/dbira.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nomad2d {

SolverSettings SolverSettings::defaults_for_budget(Scalar p_d_max_w) {
    SolverSettings s;
    s.lambda0 = 1.0 / p_d_max_w;
    s.step.rule = StepSchedule::Rule::diminishing_sqrt;
    s.step.theta0 = 100.0 / (p_d_max_w * p_d_max_w);
    return s;
}

void SolverSettings::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ConfigError("epsilon: must be positive and finite");
    }
    if (max_iterations < 1) throw ConfigError("max_iterations: must be >= 1");
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0)) {
        throw ConfigError("lambda0: must be >= 0 and finite");
    }
    if (!(step.theta0 > 0.0) || !std::isfinite(step.theta0)) {
        throw ConfigError("theta0: must be positive and finite");
    }
    if (stability_window < 1) throw ConfigError("stability_window: must be >= 1");
}

Scalar optimal_t(Scalar lambda_k, Scalar d, Scalar e) {
    if (!(lambda_k > 0.0)) return kUnbounded;
    const Scalar a = d + 1.0;
    const Scalar b = (d + 2.0) * e;
    const Scalar c = e * e - d * e / (lambda_k * M_LN2);
    // disc = d^2 e^2 + 4 (d+1) d e / (lambda ln 2) >= 0; the guard absorbs
    // rounding when the price is very high.
    const Scalar disc = std::max(0.0, b * b - 4.0 * a * c);
    // Larger root in the cancellation-free form -2c / (b + sqrt(disc)).
    return -2.0 * c / (b + std::sqrt(disc));
}

Scalar optimal_t_linear(Scalar lambda_k, Scalar slope) {
    if (!(lambda_k > 0.0)) return kUnbounded;
    return 1.0 / (lambda_k * M_LN2) - 1.0 / slope;
}

Scalar clamp_power(Scalar t, Scalar q_cap, Scalar p_d_max_w) {
    const Scalar cap = is_unbounded(q_cap) ? p_d_max_w : q_cap;
    if (is_unbounded(t)) return cap;
    return std::min(std::max(t, 0.0), cap);
}

Scalar marginal_value(Scalar t_clamped, Scalar d, Scalar e) {
    if (!(t_clamped > 0.0)) return 0.0;
    const Scalar h = d2d_rate(t_clamped, d, e) - t_clamped * d2d_rate_derivative(t_clamped, d, e);
    return std::max(0.0, h);
}

Scalar marginal_value_linear(Scalar t_clamped, Scalar slope) {
    if (!(t_clamped > 0.0)) return 0.0;
    const Scalar h =
        d2d_rate_linear(t_clamped, slope) - t_clamped * d2d_rate_linear_derivative(t_clamped, slope);
    return std::max(0.0, h);
}

std::vector<int> assign_channels(const ArrayXX& h, SolverSettings::TieRule tie) {
    const int n = static_cast<int>(h.rows());
    const int k = static_cast<int>(h.cols());
    std::vector<int> owner(n, -1);
    for (int sc = 0; sc < n; ++sc) {
        int best = -1;
        Scalar best_h = 0.0;
        for (int p = 0; p < k; ++p) {
            const Scalar val = h(sc, p);
            const bool wins = tie == SolverSettings::TieRule::lowest_index ? val > best_h : val >= best_h;
            if (val > 0.0 && wins) {
                best = p;
                best_h = val;
            }
        }
        owner[sc] = best;
    }
    return owner;
}

DualState update_duals(DualState state, const ArrayXX& x, Scalar p_d_max_w,
                       const SolverSettings& settings) {
    const int t = state.iteration + 1;
    const Scalar theta = settings.step.at(t);
    const ArrayX slack = p_d_max_w - x.colwise().sum().transpose().array();
    state.lambda = (state.lambda - theta * slack).max(0.0);
    state.iteration = t;
    return state;
}

namespace {

struct FeasibleIterate {
    std::vector<int> assignment;
    ArrayXX d2d_power;
    ArrayX d2d_rates;
    Scalar objective = 0.0;
    bool valid = false;
};

/// Rescales any pair exceeding its budget and recomputes rates.
FeasibleIterate make_feasible(const LinkRateGrid& grid, const std::vector<int>& owner,
                              const ArrayXX& x, Scalar p_d_max_w) {
    FeasibleIterate out;
    out.assignment = owner;
    out.d2d_power = x;
    const int n = grid.n_sc();
    const int k = grid.n_pairs();
    for (int p = 0; p < k; ++p) {
        const Scalar total = out.d2d_power.col(p).sum();
        if (total > p_d_max_w) out.d2d_power.col(p) *= p_d_max_w / total;
    }
    out.d2d_rates = ArrayX::Zero(n);
    for (int sc = 0; sc < n; ++sc) {
        if (owner[sc] >= 0) {
            out.d2d_rates[sc] = grid.rate(sc, owner[sc], out.d2d_power(sc, owner[sc]));
        }
    }
    out.objective = out.d2d_rates.sum();
    out.valid = true;
    return out;
}

void validate_grid(const LinkRateGrid& grid, Scalar p_d_max_w) {
    if (!(p_d_max_w > 0.0) || !std::isfinite(p_d_max_w)) {
        throw ConfigError("p_d_max_w: must be positive and finite");
    }
    for (int sc = 0; sc < grid.n_sc(); ++sc) {
        for (int p = 0; p < grid.n_pairs(); ++p) {
            const Scalar d = grid.d(sc, p);
            const Scalar e = grid.e(sc, p);
            const Scalar cap = grid.q_cap(sc, p);
            if (!(d > 0.0) || !std::isfinite(d)) {
                throw ConfigError("solver grid: rate parameter d must be positive and finite");
            }
            if (!grid.cu_idle[sc] && (!(e > 0.0) || !std::isfinite(e))) {
                throw ConfigError("solver grid: rate parameter e must be positive and finite");
            }
            if (!(cap >= 0.0)) {
                throw ConfigError("solver grid: q_cap must be >= 0 (or the unbounded sentinel)");
            }
        }
    }
}

}  // namespace

CoreSolution solve_core(const LinkRateGrid& grid, Scalar p_d_max_w, const SolverSettings& settings) {
    settings.validate();
    validate_grid(grid, p_d_max_w);
    const int n = grid.n_sc();
    const int k = grid.n_pairs();

    DualState state;
    state.lambda = ArrayX::Constant(k, settings.lambda0);
    state.beta_threshold = ArrayX::Zero(n);

    ArrayXX t_power(n, k);
    ArrayXX h(n, k);
    ArrayXX x(n, k);
    std::vector<Scalar> raw_max;   // running max of the relaxed objective
    std::vector<Scalar> best_hist; // running max of the repaired objective
    raw_max.reserve(settings.max_iterations);
    best_hist.reserve(settings.max_iterations);
    FeasibleIterate best;
    bool converged = false;

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
        for (int sc = 0; sc < n; ++sc) {
            const bool idle = grid.cu_idle[sc];
            for (int p = 0; p < k; ++p) {
                const Scalar lam = state.lambda[p];
                const Scalar stationary = idle ? optimal_t_linear(lam, grid.d(sc, p))
                                               : optimal_t(lam, grid.d(sc, p), grid.e(sc, p));
                // The pair budget alone already forbids exceeding p_d_max on
                // any single SC, so bound every iterate by it.
                const Scalar cap = is_unbounded(grid.q_cap(sc, p))
                                       ? p_d_max_w
                                       : std::min(grid.q_cap(sc, p), p_d_max_w);
                const Scalar clamped = clamp_power(stationary, cap, p_d_max_w);
                t_power(sc, p) = clamped;
                h(sc, p) = idle ? marginal_value_linear(clamped, grid.d(sc, p))
                                : marginal_value(clamped, grid.d(sc, p), grid.e(sc, p));
            }
        }
        const std::vector<int> owner = assign_channels(h, settings.tie_rule);
        x.setZero();
        Scalar obj = 0.0;
        for (int sc = 0; sc < n; ++sc) {
            state.beta_threshold[sc] = h.row(sc).maxCoeff();
            if (owner[sc] >= 0) {
                x(sc, owner[sc]) = t_power(sc, owner[sc]);
                obj += grid.rate(sc, owner[sc], x(sc, owner[sc]));
            }
        }

        state.objective_trace.push_back(obj);
        state.lambda_trace.push_back(state.lambda);
        state.slack_trace.push_back(p_d_max_w - x.colwise().sum().transpose().array());
        if (!std::isfinite(obj) || !state.lambda.isFinite().all()) {
            throw SolverNumericError("solver produced a non-finite iterate at iteration " +
                                         std::to_string(iter),
                                     state);
        }

        const FeasibleIterate current = make_feasible(grid, owner, x, p_d_max_w);
        if (!best.valid || current.objective > best.objective) best = current;

        state = update_duals(std::move(state), x, p_d_max_w, settings);

        // Integral assignment recovery can settle into a persistent two-cycle
        // whose consecutive objective difference never shrinks, so the
        // convergence test watches the running maxima instead: stop once
        // neither the relaxed nor the repaired objective has improved by
        // epsilon across the stability window.
        raw_max.push_back(raw_max.empty() ? obj : std::max(raw_max.back(), obj));
        best_hist.push_back(best.objective);
        const std::size_t window = static_cast<std::size_t>(settings.stability_window);
        if (raw_max.size() >= window) {
            const Scalar raw_climb = raw_max.back() - raw_max[raw_max.size() - window];
            const Scalar feasible_climb = best_hist.back() - best_hist[best_hist.size() - window];
            if (raw_climb < settings.epsilon && feasible_climb < settings.epsilon) {
                converged = true;
                break;
            }
        }
    }

    const FeasibleIterate& chosen = best;
    CoreSolution out;
    out.assignment = chosen.assignment;
    out.d2d_power = chosen.d2d_power;
    out.d2d_rates = chosen.d2d_rates;
    out.objective = chosen.objective;
    out.dual = std::move(state);
    out.converged = converged;
    return out;
}

SolveResult solve(const ChannelRealization& realization, const CoefficientSet& coefficients,
                  Scalar p_d_max_w, const SolverSettings& settings) {
    LinkRateGrid grid{coefficients.d, coefficients.e, coefficients.q_cap, coefficients.cu_idle};
    CoreSolution core = solve_core(grid, p_d_max_w, settings);

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
        const int xi_row = owner >= 0 ? owner : 0;
        alloc.cu_power.row(sc) =
            cu_powers(q, coefficients.xi[sc].row(xi_row).transpose(),
                      coefficients.delta.row(sc).transpose(), coefficients.gamma.row(sc).transpose())
                .transpose();
    }
    return SolveResult{std::move(alloc), std::move(core.dual), core.converged};
}

std::string trace_to_csv(const DualState& dual) {
    std::ostringstream os;
    const int k = static_cast<int>(dual.lambda.size());
    os << "iter,objective";
    for (int p = 0; p < k; ++p) os << ",lambda_" << (p + 1);
    for (int p = 0; p < k; ++p) os << ",slack_" << (p + 1);
    os << "\n";
    char buf[64];
    for (std::size_t i = 0; i < dual.objective_trace.size(); ++i) {
        os << (i + 1);
        std::snprintf(buf, sizeof buf, ",%.17g", dual.objective_trace[i]);
        os << buf;
        for (int p = 0; p < k; ++p) {
            std::snprintf(buf, sizeof buf, ",%.17g", dual.lambda_trace[i][p]);
            os << buf;
        }
        for (int p = 0; p < k; ++p) {
            std::snprintf(buf, sizeof buf, ",%.17g", dual.slack_trace[i][p]);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace nomad2d
