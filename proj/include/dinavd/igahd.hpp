#pragma once

// Discrete inertial gradient algorithm with Hessian-damping correction and
// speed restarting:
//
//   y_k   = x_k + (1 - alpha/k)(x_k - x_{k-1}) - beta*h*(grad(x_k) - grad(x_{k-1}))
//   x_k+1 = y_k - h^2 grad(y_k)
//
// The local counter k resets to 1 when the step norms stop increasing (and at
// least k_min iterations have passed since the previous reset). By default the
// reset also clears momentum (x_{k-1} := x_k); the strict variant resets only
// the counter.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dinavd/problems.hpp"

namespace dinavd {

enum class IgahdPolicy { None, Speed, WarmThenSpeed };

struct IgahdParams {
    double alpha = 3.1;
    double beta = 0.0;
    double h = 0.0;       // <= 0 selects the default 1/sqrt(L)
    int k_min = 10;
    int N = 1000;
    bool strict_reset = false;  // keep x_{k-1} at reset (counter-only reset)
};

struct Iterate {
    int global_k;
    int local_k;
    double phi_gap;
    double step_norm;   // ||x_{k+1} - x_k||
    bool restarted;
};

struct IterateLog {
    IgahdParams params;
    IgahdPolicy policy = IgahdPolicy::None;
    std::vector<Iterate> iterates;
    std::vector<int> restart_indices;  // global k at which a reset fired
    Vec x_final;
    double best_gap = 0.0;
    bool gap_vs_best_seen = false;     // phi* unknown; gaps are against best value seen
};

// One update of the scheme with momentum coefficient (1 - alpha/local_k).
inline Vec igahd_step(const Vec& x_k, const Vec& x_km1, int local_k,
                      const IgahdParams& params, const ObjectiveModel& model) {
    if (local_k < 1)
        throw std::invalid_argument("igahd_step: local_k must be >= 1");
    if (!(params.h > 0.0))
        throw std::invalid_argument("igahd_step: h must be positive");
    const double coef = 1.0 - params.alpha / static_cast<double>(local_k);
    Vec y = x_k + coef * (x_k - x_km1);
    if (params.beta != 0.0)
        y -= params.beta * params.h * (model.gradient(x_k) - model.gradient(x_km1));
    Vec g = model.gradient(y);
    if (!g.allFinite())
        throw std::runtime_error("igahd_step: nonfinite gradient");
    return y - params.h * params.h * g;
}

inline IterateLog run_igahd(const Vec& x0, const Vec& x1, IgahdParams params,
                            const ObjectiveModel& model, IgahdPolicy policy) {
    if (params.N < 1 || params.k_min < 1)
        throw std::invalid_argument("run_igahd: need N >= 1 and k_min >= 1");
    if (params.h <= 0.0) {
        if (!(model.lipschitz_L > 0.0))
            throw std::invalid_argument("run_igahd: no h given and L unknown");
        params.h = 1.0 / std::sqrt(model.lipschitz_L);
    }

    IterateLog log;
    log.params = params;
    log.policy = policy;
    log.iterates.reserve(static_cast<std::size_t>(params.N));
    log.gap_vs_best_seen = !model.optimal_value.has_value();
    const double phi_star = model.optimal_value.value_or(0.0);

    Vec x_prev = x0;
    Vec x_cur = x1;
    int local_k = 1;
    bool warm_phase = policy == IgahdPolicy::WarmThenSpeed;
    double best = model.value(x_cur) - phi_star;

    for (int k = 1; k <= params.N; ++k) {
        Vec x_next = igahd_step(x_cur, x_prev, local_k, params, model);

        const double step_new = (x_next - x_cur).norm();
        const double step_old = (x_cur - x_prev).norm();

        bool fire = false;
        if (policy != IgahdPolicy::None) {
            if (warm_phase) {
                fire = model.value(x_next) > model.value(x_cur);
                if (fire) warm_phase = false;
            } else {
                fire = step_new < step_old && local_k >= params.k_min;
            }
        }

        if (fire) {
            log.restart_indices.push_back(k);
            local_k = 1;
            x_prev = params.strict_reset ? x_cur : x_next;
        } else {
            ++local_k;
            x_prev = x_cur;
        }
        x_cur = std::move(x_next);

        const double gap = model.value(x_cur) - phi_star;
        best = std::min(best, gap);
        log.iterates.push_back({k, local_k, gap, step_new, fire});
    }

    log.x_final = x_cur;
    log.best_gap = best;
    if (log.gap_vs_best_seen)
        for (auto& it : log.iterates) it.phi_gap -= best;
    return log;
}

} // namespace dinavd
