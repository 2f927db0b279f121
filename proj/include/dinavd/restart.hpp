#pragma once

// Builds restarted trajectories by chaining integrator legs. A speed leg is
// stopped at the first time the squared speed ceases to increase; the next
// leg is relaunched from that point with zero velocity and its own local
// clock. A warm first leg (function-value restart) is supported, as are
// fixed-interval restarts.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dinavd/integrator.hpp"
#include "dinavd/problems.hpp"
#include "dinavd/theory.hpp"

namespace dinavd {

enum class RestartPolicy { None, Speed, WarmThenSpeed, FixedTau };

struct RestartOptions {
    RestartPolicy policy = RestartPolicy::Speed;
    double fixed_tau = 0.0;   // leg duration for FixedTau
    double grad_tol = -1.0;   // early stop; < 0 selects 1e-13 * L * ||x0||
    double t_cap = 0.0;       // speed-leg safety horizon; 0 selects the default
    double delta_frac = 1e-4; // regularized start at delta = delta_frac * tau1
    Tolerances tol;
};

struct AtMinimizerError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct HorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WarmInfo {
    double t_restart_global = 0.0;
    Vec x_restart;
    double phi_at_restart = 0.0;
};

struct RestartedTrajectory {
    ObjectiveModel model;
    DynamicsParams params;
    RestartPolicy policy = RestartPolicy::None;
    std::vector<TrajectorySegment> segments;
    std::vector<double> seg_global_start; // global time of each segment's local origin
    std::vector<double> seg_local0;       // local time matching that global origin
    std::vector<double> restart_times;    // S_1, S_2, ... (global)
    std::vector<Vec> restart_points;      // x_i = chi(S_i)
    std::optional<WarmInfo> warm_info;
    double delta = 0.0;                   // regularization offset of zero-velocity legs
    double t_end_global = 0.0;
    bool precision_floor = false;
    bool horizon_fallback = false;
};

struct ChiState {
    Vec x;
    Vec v;
    double phi_gap;
};

namespace detail {

inline double default_t_cap(double alpha, double beta, const ObjectiveModel& model) {
    const double t3 = theory::tau3(alpha, beta, model.lipschitz_L);
    if (model.growth_mu > 0.0) {
        const double p = theory::psi(t3, alpha, beta, model.lipschitz_L);
        const double E = (alpha + 1.0) * (alpha + 1.0)
                       / (2.0 * alpha * model.growth_mu * t3 * t3 * p);
        const double bound = t3 * std::exp(E);
        if (std::isfinite(bound)) return std::min(bound, 1e4 * t3);
    }
    return 1e3 * t3;
}

struct SpeedLeg {
    TrajectorySegment segment;
    double T = 0.0;     // restart time in local clock (from 0)
    bool capped = false;
};

// One zero-velocity leg from z, local clock starting at 0 via the
// delta-regularized start, stopped at the speed peak.
inline SpeedLeg speed_leg(const Vec& z, const DynamicsParams& base, const ObjectiveModel& model,
                          double t_cap, const Tolerances& tol, double delta_frac,
                          double grad_tol) {
    const Vec g = model.gradient(z);
    if (g.norm() == 0.0)
        throw AtMinimizerError("restart_time: z is a minimizer, T(z) undefined");
    if (!(t_cap > 0.0))
        throw std::invalid_argument("restart_time: t_cap must be positive");

    DynamicsParams leg = base;
    leg.x_start = z;
    leg.v_start = Vec::Zero(z.size());
    const double delta = delta_frac * theory::tau1(leg.alpha, leg.beta, model.lipschitz_L);
    auto [xd, vd] = delta_start(leg, model, delta);
    leg.t_start = delta;
    leg.x_start = std::move(xd);
    leg.v_start = std::move(vd);

    EventOptions ev;
    ev.speed_peak = true;
    ev.grad_tol = grad_tol;

    SpeedLeg out;
    out.segment = integrate(leg, model, t_cap, tol, ev);
    out.T = out.segment.t_final;
    out.capped = out.segment.termination == Termination::TimeEnd;
    if (out.segment.termination == Termination::SpeedPeak && model.lipschitz_L > 0.0) {
        const double t3 = theory::tau3(leg.alpha, leg.beta, model.lipschitz_L);
        if (out.T < t3 * (1.0 - 1e-6))
            throw std::logic_error("restart_time: observed T below the tau3 lower bound");
    }
    return out;
}

} // namespace detail

struct RestartTimeResult {
    double T;
    TrajectorySegment segment;
};

// First time the squared speed stops increasing for the leg launched from z
// with zero velocity. Throws HorizonError if no crossing occurs before t_cap.
inline RestartTimeResult restart_time(const Vec& z, const DynamicsParams& params,
                                      const ObjectiveModel& model, double t_cap = 0.0,
                                      const Tolerances& tol = {}, double delta_frac = 1e-4) {
    if (t_cap <= 0.0) t_cap = detail::default_t_cap(params.alpha, params.beta, model);
    auto leg = detail::speed_leg(z, params, model, t_cap, tol, delta_frac, 0.0);
    if (leg.capped)
        throw HorizonError("restart_time: no speed peak before t_cap");
    return {leg.T, std::move(leg.segment)};
}

inline RestartedTrajectory build_restarted(const Vec& x0, const DynamicsParams& params,
                                           const ObjectiveModel& model, double t_total,
                                           const RestartOptions& opts = {}) {
    if (!(t_total > params.t_start))
        throw std::invalid_argument("build_restarted: t_total must exceed t_start");
    if (opts.policy == RestartPolicy::FixedTau && !(opts.fixed_tau > 0.0))
        throw std::invalid_argument("build_restarted: FixedTau needs fixed_tau > 0");

    RestartedTrajectory traj;
    traj.model = model;
    traj.params = params;
    traj.params.x_start = x0;
    traj.policy = opts.policy;

    const double grad_tol = opts.grad_tol >= 0.0
        ? opts.grad_tol
        : 1e-13 * model.lipschitz_L * x0.norm();
    const double t_cap = opts.t_cap > 0.0 ? opts.t_cap
                                          : detail::default_t_cap(params.alpha, params.beta, model);
    traj.delta = opts.delta_frac * theory::tau1(params.alpha, params.beta, model.lipschitz_L);

    const double phi_star = model.optimal_value.value_or(0.0);
    const double gap0 = model.value(x0) - phi_star;
    double best_gap = gap0;

    // --- first leg ---
    DynamicsParams leg0 = traj.params;
    const bool v0_zero = leg0.v_start.size() == 0 || leg0.v_start.norm() == 0.0;
    double local0;
    if (leg0.t_start == 0.0) {
        if (!v0_zero)
            throw std::invalid_argument("build_restarted: a t_start = 0 launch requires zero velocity");
        leg0.v_start = Vec::Zero(x0.size());
        auto [xd, vd] = delta_start(leg0, model, traj.delta);
        leg0.t_start = traj.delta;
        leg0.x_start = std::move(xd);
        leg0.v_start = std::move(vd);
        local0 = 0.0;
    } else {
        if (leg0.v_start.size() == 0) leg0.v_start = Vec::Zero(x0.size());
        local0 = leg0.t_start;
    }

    EventOptions ev0;
    ev0.grad_tol = grad_tol;
    double leg0_end = t_total;  // local == global for the first leg
    switch (opts.policy) {
        case RestartPolicy::None: break;
        case RestartPolicy::Speed: ev0.speed_peak = true; leg0_end = std::min(t_total, local0 + t_cap); break;
        case RestartPolicy::WarmThenSpeed: ev0.value_increase = true; break;
        case RestartPolicy::FixedTau: leg0_end = std::min(t_total, local0 + opts.fixed_tau); break;
    }

    const double global0 = params.t_start;
    traj.seg_global_start.push_back(global0);
    traj.seg_local0.push_back(local0);
    traj.segments.push_back(integrate(leg0, model, leg0_end, opts.tol, ev0));

    auto leg_done = [&](const TrajectorySegment& seg, double global_start, double seg_local0) {
        const double global_end = global_start + (seg.t_final - seg_local0);
        const Vec& x_end = seg.knots().back().x;
        best_gap = std::min(best_gap, model.value(x_end) - phi_star);
        return global_end;
    };

    double global_t = leg_done(traj.segments.back(), global0, local0);
    bool done = traj.segments.back().termination == Termination::GradConverged
             || global_t >= t_total * (1.0 - 1e-15)
             || opts.policy == RestartPolicy::None;
    if (opts.policy == RestartPolicy::WarmThenSpeed && !done
        && traj.segments.back().termination == Termination::ValueIncrease) {
        const Vec& xw = traj.segments.back().knots().back().x;
        traj.warm_info = WarmInfo{global_t, xw, model.value(xw)};
    }
    if (opts.policy == RestartPolicy::Speed
        && traj.segments.back().termination == Termination::TimeEnd
        && global_t < t_total * (1.0 - 1e-15)) {
        traj.horizon_fallback = true;  // no peak before t_cap; restart anyway
    }

    // --- restart legs ---
    while (!done) {
        const Vec x_i = traj.segments.back().knots().back().x;
        traj.restart_times.push_back(global_t);
        traj.restart_points.push_back(x_i);

        if (model.gradient(x_i).norm() == 0.0) {      // landed exactly on a minimizer
            traj.restart_times.pop_back();
            traj.restart_points.pop_back();
            break;
        }

        const double horizon_local = t_total - global_t;
        DynamicsParams legp = params;
        legp.x_start = x_i;

        TrajectorySegment seg;
        if (opts.policy == RestartPolicy::FixedTau) {
            const double leg_end = std::min(opts.fixed_tau, horizon_local);
            legp.v_start = Vec::Zero(x_i.size());
            auto [xd, vd] = delta_start(legp, model, traj.delta);
            legp.t_start = traj.delta;
            legp.x_start = std::move(xd);
            legp.v_start = std::move(vd);
            EventOptions ev;
            ev.grad_tol = grad_tol;
            seg = integrate(legp, model, leg_end, opts.tol, ev);
        } else {
            auto leg = detail::speed_leg(x_i, legp, model, std::min(t_cap, horizon_local),
                                         opts.tol, opts.delta_frac, grad_tol);
            if (leg.capped && horizon_local > t_cap) traj.horizon_fallback = true;
            seg = std::move(leg.segment);
        }

        traj.seg_global_start.push_back(global_t);
        traj.seg_local0.push_back(0.0);
        global_t = leg_done(seg, global_t, 0.0);
        done = seg.termination == Termination::GradConverged
            || global_t >= t_total * (1.0 - 1e-15);
        traj.segments.push_back(std::move(seg));
    }

    traj.t_end_global = global_t;
    if (gap0 > 0.0 && best_gap < 1e-16 * gap0) traj.precision_floor = true;
    return traj;
}

// Continuous evaluation of the restarted trajectory at global time t, with
// right-continuity at restart instants (velocity reads 0 there).
inline ChiState chi_eval(const RestartedTrajectory& traj, double t) {
    if (t < traj.seg_global_start.front() - 1e-12 || t > traj.t_end_global + 1e-12)
        throw std::out_of_range("chi_eval: t outside covered horizon");
    t = std::min(std::max(t, traj.seg_global_start.front()), traj.t_end_global);

    std::size_t lo = 0, hi = traj.segments.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (traj.seg_global_start[mid] <= t) lo = mid; else hi = mid;
    }
    const TrajectorySegment& seg = traj.segments[lo];
    const double local = traj.seg_local0[lo] + (t - traj.seg_global_start[lo]);
    const double phi_star = traj.model.optimal_value.value_or(0.0);

    ChiState st;
    if (local < seg.knots().front().t) {
        // Inside the delta-regularized prefix: evaluate the small-time
        // expansion from the leg's launch point directly.
        const Vec& z = (lo == 0) ? traj.params.x_start : traj.restart_points[lo - 1];
        const Vec g = traj.model.gradient(z);
        const double a1 = traj.params.alpha + 1.0;
        st.x = z - (local * local / (2.0 * a1)) * g;
        st.v = (-local / a1) * g;
    } else {
        Vec x, v;
        seg.dense_state(local, x, v);
        st.x = std::move(x);
        st.v = std::move(v);
    }
    st.phi_gap = traj.model.value(st.x) - phi_star;
    return st;
}

} // namespace dinavd
