#pragma once

// Closed-form constants of the linear convergence analysis for the
// speed-restarted DIN-AVD dynamics: the auxiliary polynomials H and G,
// their roots tau1/tau2/tau3, the decrease factor Psi, and the
// (C, K) rate certificate.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dinavd::theory {

// H(t) = 1 - L*beta*t/(alpha+2) - L*t^2/(2*(alpha+3)).
// Decreases strictly from 1 to 0 on [0, tau1].
inline double H(double t, double alpha, double beta, double L) {
    return 1.0 - L * beta * t / (alpha + 2.0) - L * t * t / (2.0 * (alpha + 3.0));
}

// G(t) = 1 - (2*alpha+3)*beta*L*t/(alpha+2) - (alpha+2)*L*t^2/(alpha+3).
// Equivalently (alpha+1)*H(t) - alpha - L*t^2/2 - beta*L*t.
inline double G(double t, double alpha, double beta, double L) {
    return 1.0 - (2.0 * alpha + 3.0) * beta * L * t / (alpha + 2.0)
         - (alpha + 2.0) * L * t * t / (alpha + 3.0);
}

namespace detail {

inline void require_valid(double alpha, double beta, double L) {
    if (!(L > 0.0) || !(beta >= 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("theory: need L > 0, beta >= 0, alpha > 0");
}

// Bisection root of a decreasing function on [0, hi], used as an internal
// cross-check of the closed-form roots.
template <class F>
double bisect_root(F&& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo < 0.0 || fhi > 0.0)
        throw std::logic_error("theory: bisection bracket invalid");
    for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline void cross_check(double closed, double root, const char* what) {
    if (std::abs(closed - root) > 1e-10 * (1.0 + std::abs(closed)))
        throw std::logic_error(std::string("theory: closed form and bisection disagree for ") + what);
}

} // namespace detail

// Positive zero of H.
inline double tau1(double alpha, double beta, double L) {
    detail::require_valid(alpha, beta, L);
    const double r = (alpha + 3.0) / (alpha + 2.0);
    const double q = 2.0 * (alpha + 3.0) / L;
    const double t = q / (r * beta + std::sqrt(r * r * beta * beta + q));
    detail::cross_check(t, detail::bisect_root([&](double u) { return H(u, alpha, beta, L); },
                                               0.0, 2.0 * t + 1.0), "tau1");
    return t;
}

// Level where H crosses 1/2; H(t) > 1/2 on [0, tau2).
inline double tau2(double alpha, double beta, double L) {
    detail::require_valid(alpha, beta, L);
    const double r = (alpha + 3.0) / (alpha + 2.0);
    const double q = (alpha + 3.0) / L;
    const double t = q / (r * beta + std::sqrt(r * r * beta * beta + q));
    detail::cross_check(t, detail::bisect_root([&](double u) { return H(u, alpha, beta, L) - 0.5; },
                                               0.0, 2.0 * t + 1.0), "tau2");
    return t;
}

// Positive zero of G; lower bound on every speed-restart time.
inline double tau3(double alpha, double beta, double L) {
    detail::require_valid(alpha, beta, L);
    const double c = (alpha + 3.0) * (2.0 * alpha + 3.0) / (2.0 * (alpha + 2.0) * (alpha + 2.0));
    const double q = (alpha + 3.0) / ((alpha + 2.0) * L);
    const double t = q / (c * beta + std::sqrt(c * c * beta * beta + q));
    detail::cross_check(t, detail::bisect_root([&](double u) { return G(u, alpha, beta, L); },
                                               0.0, 2.0 * t + 1.0), "tau3");
    return t;
}

// Psi(tau) = [2 - 1/H(tau)]^2, defined for tau in (0, tau2) where H > 1/2.
inline double psi(double tau, double alpha, double beta, double L) {
    detail::require_valid(alpha, beta, L);
    if (!(tau > 0.0) || tau >= tau2(alpha, beta, L))
        throw std::domain_error("psi: tau must lie in (0, tau2)");
    const double h = H(tau, alpha, beta, L);
    const double b = 2.0 - 1.0 / h;
    return b * b;
}

enum class TauChoice { Tau3, Optimize };

struct RateCertificate {
    double alpha = 0, beta = 0, L = 0, mu = 0;
    double tau1 = 0, tau2 = 0, tau3 = 0;
    double tau_star = 0;        // parameter used for the certificate
    double psi_at_tau_star = 0;
    double Q = 0;               // per-restart reduction factor
    double tau_upper = 0;       // upper bound on every restart interval
    double C = 0;               // gap(t) <= C * exp(-K t) * gap(0)
    double K = 0;
};

namespace detail {

// Exponent E(tau) = (alpha+1)^2 / (2*alpha*mu*tau^2*Psi(tau)).
inline double cert_exponent(double tau, double alpha, double beta, double L, double mu) {
    const double p = psi(tau, alpha, beta, L);
    return (alpha + 1.0) * (alpha + 1.0) / (2.0 * alpha * mu * tau * tau * p);
}

inline double cert_Q(double tau, double alpha, double beta, double L, double mu) {
    const double p = psi(tau, alpha, beta, L);
    return 1.0 - alpha * mu * tau * tau * p / ((alpha + 1.0) * (alpha + 1.0));
}

// K(tau) = -ln(Q)/tau * exp(-E); computed in the underflow-safe form.
inline double cert_K(double tau, double alpha, double beta, double L, double mu) {
    const double Q = cert_Q(tau, alpha, beta, L, mu);
    const double E = cert_exponent(tau, alpha, beta, L, mu);
    return -std::log(Q) * std::exp(-E) / tau;
}

} // namespace detail

inline RateCertificate certificate(double alpha, double beta, double L, double mu,
                                   TauChoice tau_choice = TauChoice::Tau3) {
    if (!(mu > 0.0) || !(mu <= L))
        throw std::invalid_argument("certificate: quadratic-growth modulus unavailable (need 0 < mu <= L)");
    if (!(alpha >= 3.0))
        throw std::invalid_argument("certificate: need alpha >= 3");

    RateCertificate cert;
    cert.alpha = alpha;
    cert.beta = beta;
    cert.L = L;
    cert.mu = mu;
    cert.tau1 = tau1(alpha, beta, L);
    cert.tau2 = tau2(alpha, beta, L);
    cert.tau3 = tau3(alpha, beta, L);

    double ts = cert.tau3;
    if (tau_choice == TauChoice::Optimize) {
        // K vanishes at both ends of (0, tau2); the search stays inside
        // (0, tau3] where the certificate never relies on an unverified T*.
        // Coarse scan, then golden-section refinement.
        const double lo_edge = 1e-12 * cert.tau3;
        double best_tau = cert.tau3;
        double best_K = detail::cert_K(best_tau, alpha, beta, L, mu);
        const int grid = 200;
        for (int i = 1; i < grid; ++i) {
            const double t = cert.tau3 * static_cast<double>(i) / grid;
            const double k = detail::cert_K(t, alpha, beta, L, mu);
            if (k > best_K) { best_K = k; best_tau = t; }
        }
        double a = std::max(lo_edge, best_tau - cert.tau3 / grid);
        double b = std::min(cert.tau3, best_tau + cert.tau3 / grid);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = detail::cert_K(x1, alpha, beta, L, mu);
        double f2 = detail::cert_K(x2, alpha, beta, L, mu);
        while (b - a > 1e-10) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a); f2 = detail::cert_K(x2, alpha, beta, L, mu);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a); f1 = detail::cert_K(x1, alpha, beta, L, mu);
            }
        }
        ts = 0.5 * (a + b);
    }

    cert.tau_star = ts;
    cert.psi_at_tau_star = psi(ts, alpha, beta, L);
    cert.Q = detail::cert_Q(ts, alpha, beta, L, mu);
    const double E = detail::cert_exponent(ts, alpha, beta, L, mu);
    cert.tau_upper = ts * std::exp(E);       // may overflow to inf for tiny mu/L
    cert.C = 1.0 / cert.Q;
    cert.K = detail::cert_K(ts, alpha, beta, L, mu);

    // The two algebraic forms of K must agree whenever both are finite.
    if (std::isfinite(cert.tau_upper)) {
        const double K_alt = -std::log(cert.Q) / cert.tau_upper;
        if (std::abs(cert.K - K_alt) > 1e-12 * (std::abs(cert.K) + 1e-300))
            throw std::logic_error("certificate: the two forms of K disagree");
    }
    return cert;
}

} // namespace dinavd::theory
