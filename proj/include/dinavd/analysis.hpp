#pragma once

// Rate fitting and summary statistics for trajectories and iterate logs:
// least-squares fit of gap(t) ~ A * exp(-B t) on the log scale, last/best
// value extraction, and verification of a rate certificate against a
// measured trajectory.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dinavd/restart.hpp"
#include "dinavd/theory.hpp"

namespace dinavd {

struct GapSample {
    double t;
    double gap;
};

struct RateFit {
    double A = 0.0;
    double B = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    int clipped = 0;   // samples excluded as below the rounding floor
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least squares on (t, ln gap) inside [window_lo, window_hi]. Gaps at or
// below 100 * eps * (first sample's gap) are excluded and counted; they sit
// at the rounding floor of double arithmetic.
inline RateFit fit_rate(const std::vector<GapSample>& samples,
                        double window_lo, double window_hi) {
    if (samples.empty())
        throw InsufficientDataError("fit_rate: no samples");
    const double floor_gap = 100.0 * std::numeric_limits<double>::epsilon()
                           * std::abs(samples.front().gap);

    RateFit fit;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;

    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    int m = 0;
    for (const auto& s : samples) {
        if (s.t < window_lo || s.t > window_hi) continue;
        if (!(s.gap > floor_gap)) { ++fit.clipped; continue; }
        const double y = std::log(s.gap);
        st += s.t; sy += y; stt += s.t * s.t; sty += s.t * y; syy += y * y;
        ++m;
    }
    if (m < 10)
        throw InsufficientDataError("fit_rate: fewer than 10 usable samples in window");

    const double denom = m * stt - st * st;
    if (denom == 0.0)
        throw InsufficientDataError("fit_rate: degenerate abscissae");
    const double slope = (m * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / m;
    fit.B = -slope;
    fit.A = std::exp(intercept);

    const double sst = syy - sy * sy / m;
    const double ssr = sst - slope * (sty - st * sy / m);
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

struct Summary {
    double last_value;
    double best_value;
};

inline Summary summarize(const std::vector<GapSample>& samples, double t_report) {
    if (samples.empty() || samples.back().t < t_report)
        throw std::out_of_range("summarize: horizon does not cover t_report");
    Summary s{0.0, std::numeric_limits<double>::infinity()};
    double best_dt = std::numeric_limits<double>::infinity();
    for (const auto& g : samples) {
        if (g.t <= t_report) s.best_value = std::min(s.best_value, g.gap);
        const double dt = std::abs(g.t - t_report);
        if (dt < best_dt) { best_dt = dt; s.last_value = g.gap; }
    }
    return s;
}

// Uniformly sampled gap series from a restarted trajectory.
inline std::vector<GapSample> sample_gaps(const RestartedTrajectory& traj,
                                          int count, double t_lo = -1.0, double t_hi = -1.0) {
    if (t_lo < 0.0) t_lo = traj.seg_global_start.front();
    if (t_hi < 0.0) t_hi = traj.t_end_global;
    std::vector<GapSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / (count - 1.0);
        out.push_back({t, chi_eval(traj, t).phi_gap});
    }
    return out;
}

struct CertificateReport {
    bool pass = false;
    double max_ratio = 0.0;       // max over t of gap(t) / (C e^{-Kt} gap(0))
    double worst_t = 0.0;
    bool dist_bound_checked = false;
    bool dist_bound_pass = false;
};

// Verifies gap(t) <= C e^{-Kt} gap(0) along the trajectory, and, when a
// minimizer is known, the (C L / 2) e^{-Kt} dist^2 form as well.
inline CertificateReport check_certificate(const RestartedTrajectory& traj,
                                           const theory::RateCertificate& cert,
                                           int sample_count = 500) {
    if (!traj.model.optimal_value.has_value())
        throw std::invalid_argument("check_certificate: optimal value unknown, not checkable");

    const double t0 = traj.seg_global_start.front();
    const double gap0 = chi_eval(traj, t0).phi_gap;
    CertificateReport rep;
    for (int i = 0; i < sample_count; ++i) {
        const double t = t0 + (traj.t_end_global - t0) * i / (sample_count - 1.0);
        const double bound = cert.C * std::exp(-cert.K * (t - t0)) * gap0;
        const double ratio = chi_eval(traj, t).phi_gap / bound;
        if (ratio > rep.max_ratio) { rep.max_ratio = ratio; rep.worst_t = t; }
    }
    rep.pass = rep.max_ratio <= 1.0 + 1e-9;

    if (traj.model.minimizer_hint.has_value()) {
        rep.dist_bound_checked = true;
        const double d2 = (traj.params.x_start - *traj.model.minimizer_hint).squaredNorm();
        rep.dist_bound_pass = true;
        for (int i = 0; i < sample_count; ++i) {
            const double t = t0 + (traj.t_end_global - t0) * i / (sample_count - 1.0);
            const double bound = 0.5 * cert.C * cert.L * std::exp(-cert.K * (t - t0)) * d2;
            if (chi_eval(traj, t).phi_gap > bound * (1.0 + 1e-9)) {
                rep.dist_bound_pass = false;
                break;
            }
        }
    }
    return rep;
}

} // namespace dinavd
