#pragma once

// Adaptive Dormand-Prince 5(4) integration of the inertial dynamics
//
//   xdd + (alpha/t) xd + grad phi(x) + beta Hess phi(x) xd = 0
//
// on the first-order state (x, v), with continuous (dense) output, speed-peak
// and function-increase event detection, and a regularized start at t = delta
// for trajectories launched from rest at the t = 0 singularity.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dinavd/problems.hpp"
#include "dinavd/theory.hpp"

namespace dinavd {

enum class SystemKind { Avd, DinAvd };

struct DynamicsParams {
    double alpha = 3.0;
    double beta = 0.0;
    double t_start = 0.0;
    Vec x_start;
    Vec v_start;
    SystemKind system = SystemKind::DinAvd;
};

struct Tolerances {
    double rel = 1e-9;
    double abs = 1e-12;
};

enum class Termination { TimeEnd, SpeedPeak, ValueIncrease, GradConverged };

struct EventOptions {
    bool speed_peak = false;     // stop where d/dt ||v||^2 first crosses <= 0
    bool value_increase = false; // stop at first knot where phi increases
    double grad_tol = 0.0;       // stop once ||grad phi|| <= grad_tol (0 = off)
};

struct IntegratorError : std::runtime_error {
    double t_last;
    IntegratorError(const std::string& msg, double t) : std::runtime_error(msg), t_last(t) {}
};
struct StiffnessError : IntegratorError {
    using IntegratorError::IntegratorError;
};
struct DivergenceError : IntegratorError {
    using IntegratorError::IntegratorError;
};

// Acceleration of the dynamics; the Hessian term is skipped when beta = 0 so
// the AVD and DIN-AVD paths coincide exactly in that case.
inline Vec rhs(const DynamicsParams& params, const ObjectiveModel& model,
               double t, const Vec& x, const Vec& v) {
    if (!(t > 0.0))
        throw std::domain_error("rhs: t must be positive (use delta_start at the singularity)");
    Vec a = -(params.alpha / t) * v - model.gradient(x);
    if (params.system == SystemKind::DinAvd && params.beta != 0.0)
        a -= params.beta * model.hessian_vec(x, v);
    return a;
}

// Second-order small-time expansion of the solution started from rest:
//   x_delta = x0 - delta^2/(2(alpha+1)) grad phi(x0),
//   v_delta = -delta/(alpha+1) grad phi(x0).
// Valid for delta well below tau1; the expansion error is O(delta^3).
inline std::pair<Vec, Vec> delta_start(const DynamicsParams& params,
                                       const ObjectiveModel& model, double delta) {
    if (params.v_start.size() != 0 && params.v_start.norm() != 0.0)
        throw std::invalid_argument("delta_start: requires a zero-velocity start");
    if (!(delta > 0.0) || delta >= theory::tau1(params.alpha, params.beta, model.lipschitz_L))
        throw std::invalid_argument("delta_start: need 0 < delta < tau1");
    const Vec g = model.gradient(params.x_start);
    Vec x = params.x_start - (delta * delta / (2.0 * (params.alpha + 1.0))) * g;
    Vec v = (-delta / (params.alpha + 1.0)) * g;
    return {std::move(x), std::move(v)};
}

struct Knot {
    double t;
    Vec x;
    Vec v;
};

class TrajectorySegment {
public:
    DynamicsParams params;
    Termination termination = Termination::TimeEnd;
    double t_final = 0.0;

    const std::vector<Knot>& knots() const { return knots_; }

    // Dense state at any t in [t0, t_final]. Acceleration is recomputed from
    // the right-hand side, not interpolated.
    void dense_eval(const ObjectiveModel& model, double t, Vec& x, Vec& v, Vec& a) const {
        dense_state(t, x, v);
        a = rhs(params, model, t, x, v);
    }

    void dense_state(double t, Vec& x, Vec& v) const {
        if (t < knots_.front().t - 1e-12 || t > t_final + 1e-12)
            throw std::out_of_range("dense_state: t outside segment");
        t = std::min(std::max(t, knots_.front().t), t_final);
        if (steps_.empty()) { x = knots_.front().x; v = knots_.front().v; return; }
        // Locate the step containing t.
        std::size_t lo = 0, hi = steps_.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (steps_[mid].t0 <= t) lo = mid; else hi = mid;
        }
        eval_step(steps_[lo], t, dim_, x, v);
    }

    // Internal step record carrying the quartic continuous extension.
    struct Step {
        double t0, h;
        std::array<Eigen::VectorXd, 5> rcont;
    };

    static void eval_step(const Step& s, double t, std::size_t n, Vec& x, Vec& v) {
        const double theta = (t - s.t0) / s.h;
        const double omt = 1.0 - theta;
        Vec y = s.rcont[0] + theta * (s.rcont[1] + omt * (s.rcont[2] + theta * (s.rcont[3] + omt * s.rcont[4])));
        x = y.head(n);
        v = y.tail(n);
    }

    std::vector<Knot> knots_;
    std::vector<Step> steps_;
    std::size_t dim_ = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

} // namespace detail

// Integrates the dynamics from params.t_start (> 0) to t_end. Throws
// StiffnessError on step-size underflow and DivergenceError on nonfinite
// state; both carry the last good time.
inline TrajectorySegment integrate(const DynamicsParams& params, const ObjectiveModel& model,
                                   double t_end, const Tolerances& tol = {},
                                   const EventOptions& events = {}) {
    if (!(t_end > params.t_start))
        throw std::invalid_argument("integrate: t_end must exceed t_start");
    if (!(tol.rel > 0.0) || !(tol.abs > 0.0))
        throw std::invalid_argument("integrate: tolerances must be positive");

    const std::size_t n = static_cast<std::size_t>(params.x_start.size());
    const std::size_t m = 2 * n;

    auto f = [&](double t, const Vec& y) -> Vec {
        Vec out(m);
        const Vec x = y.head(n);
        const Vec v = y.tail(n);
        out.head(n) = v;
        out.tail(n) = rhs(params, model, t, x, v);
        return out;
    };

    TrajectorySegment seg;
    seg.params = params;
    seg.dim_ = n;

    double t = params.t_start;
    Vec y(m);
    y.head(n) = params.x_start;
    y.tail(n) = (params.v_start.size() == static_cast<Eigen::Index>(n))
                    ? params.v_start
                    : Vec::Zero(n).eval();
    Vec k1 = f(t, y);

    seg.knots_.push_back({t, y.head(n), y.tail(n)});

    using T = detail::Dopri5;

    // Initial step: small relative to both the start time (the alpha/t term
    // dominates there) and the span.
    double h = std::min({0.01 * (t_end - t), 0.1 * t, 1.0 / std::sqrt(std::max(model.lipschitz_L, 1e-12))});
    h = std::max(h, 1e-14 * (t_end - params.t_start));

    auto speed_event = [&](double tt, const Vec& xx, const Vec& vv) {
        return 2.0 * vv.dot(rhs(params, model, tt, xx, vv));
    };

    double phi_prev = events.value_increase ? model.value(params.x_start) : 0.0;
    bool ev_armed = events.speed_peak && speed_event(t, y.head(n), y.tail(n)) > 0.0;

    const int max_steps = 100'000'000;
    for (int step = 0; step < max_steps; ++step) {
        if (t >= t_end) break;
        bool last = false;
        if (t + h >= t_end) { h = t_end - t; last = true; }

        const Vec k2 = f(t + T::c2 * h, y + h * (T::a21 * k1));
        const Vec k3 = f(t + T::c3 * h, y + h * (T::a31 * k1 + T::a32 * k2));
        const Vec k4 = f(t + T::c4 * h, y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
        const Vec k5 = f(t + T::c5 * h, y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4));
        const Vec k6 = f(t + h, y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5));
        Vec ynew = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
        const Vec k7 = f(t + h, ynew);

        if (!ynew.allFinite())
            throw DivergenceError("integrate: nonfinite state", t);

        const Vec err_vec = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = err_vec[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / static_cast<double>(m));

        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw StiffnessError("integrate: step-size underflow", t);
            continue;
        }

        // Accepted: build the continuous extension for this step.
        TrajectorySegment::Step rec;
        rec.t0 = t;
        rec.h = h;
        const Vec dy = ynew - y;
        rec.rcont[0] = y;
        rec.rcont[1] = dy;
        rec.rcont[2] = h * k1 - dy;
        rec.rcont[3] = dy - h * k7 - rec.rcont[2];
        rec.rcont[4] = h * (T::d1 * k1 + T::d3 * k3 + T::d4 * k4 + T::d5 * k5 + T::d6 * k6 + T::d7 * k7);
        seg.steps_.push_back(std::move(rec));

        const double t_new = last ? t_end : t + h;

        // Speed-peak event: arm once positive, fire on the first crossing to
        // <= 0, then bisect the dense output to localize it.
        if (events.speed_peak) {
            const double ev_new = 2.0 * ynew.tail(n).dot(k7.tail(n));
            if (ev_armed && ev_new <= 0.0) {
                const auto& last_step = seg.steps_.back();
                double lo = t, hi = t_new;
                Vec xx(n), vv(n);
                for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    TrajectorySegment::eval_step(last_step, mid, n, xx, vv);
                    if (speed_event(mid, xx, vv) > 0.0) lo = mid; else hi = mid;
                }
                const double t_star = 0.5 * (lo + hi);
                TrajectorySegment::eval_step(last_step, t_star, n, xx, vv);
                seg.knots_.push_back({t_star, xx, vv});
                seg.t_final = t_star;
                seg.termination = Termination::SpeedPeak;
                return seg;
            }
            if (ev_new > 0.0) ev_armed = true;
        }

        t = t_new;
        y.swap(ynew);
        k1 = k7;  // FSAL
        seg.knots_.push_back({t, y.head(n), y.tail(n)});

        if (events.value_increase) {
            const double phi_new = model.value(y.head(n));
            if (phi_new > phi_prev) {
                seg.t_final = t;
                seg.termination = Termination::ValueIncrease;
                return seg;
            }
            phi_prev = phi_new;
        }
        if (events.grad_tol > 0.0 && model.gradient(y.head(n)).norm() <= events.grad_tol) {
            seg.t_final = t;
            seg.termination = Termination::GradConverged;
            return seg;
        }

        if (!last)
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
    }

    seg.t_final = t_end;
    seg.termination = Termination::TimeEnd;
    return seg;
}

} // namespace dinavd
