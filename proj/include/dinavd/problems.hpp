#pragma once

// Convex objective oracles and the quadratic problem instances used by the
// experiments. Objectives are exposed only through value / gradient /
// Hessian-vector-product callables so no dense Hessian is ever materialized.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dinavd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ObjectiveModel {
    int dimension = 0;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Vec(const Vec&, const Vec&)> hessian_vec;
    double lipschitz_L = 0.0;     // gradient Lipschitz constant
    double growth_mu = 0.0;       // quadratic-growth modulus, 0 = unknown
    std::optional<double> optimal_value;
    std::optional<Vec> minimizer_hint;
};

// phi(x) = 1/2 x^T A x + b^T x with A symmetric positive semidefinite.
struct QuadraticSpec {
    Mat A;
    Vec b;
};

inline ObjectiveModel model_from_quadratic(const QuadraticSpec& spec,
                                           double L, double mu,
                                           std::optional<Vec> minimizer,
                                           std::optional<double> opt_value) {
    auto data = std::make_shared<QuadraticSpec>(spec);
    ObjectiveModel m;
    m.dimension = static_cast<int>(spec.A.rows());
    m.value = [data](const Vec& x) {
        return 0.5 * x.dot(data->A * x) + data->b.dot(x);
    };
    m.gradient = [data](const Vec& x) -> Vec { return data->A * x + data->b; };
    m.hessian_vec = [data](const Vec&, const Vec& d) -> Vec { return data->A * d; };
    m.lipschitz_L = L;
    m.growth_mu = mu;
    m.optimal_value = opt_value;
    m.minimizer_hint = std::move(minimizer);
    return m;
}

// The 3-D diagonal quadratic phi(x) = 1/2 (x1^2 + rho*x2^2 + rho^2*x3^2),
// with condition number max{rho^2, rho^-2}.
inline ObjectiveModel make_diag_rho(double rho) {
    if (!(rho > 0.0))
        throw std::invalid_argument("make_diag_rho: rho must be positive");
    QuadraticSpec spec;
    spec.A = Vec{{1.0, rho, rho * rho}}.asDiagonal();
    spec.b = Vec::Zero(3);
    const double L = std::max(1.0, rho * rho);
    const double mu = std::min(1.0, rho * rho);
    return model_from_quadratic(spec, L, mu, Vec::Zero(3), 0.0);
}

// Random quadratic A = Q^T D Q with seeded orthogonal Q (from QR of a
// Gaussian matrix) and eigenvalues drawn uniformly from (eig_low, eig_high).
inline std::pair<ObjectiveModel, QuadraticSpec>
make_random_quadratic(int n, double eig_low, double eig_high, std::uint64_t seed) {
    if (n < 1)
        throw std::invalid_argument("make_random_quadratic: n must be >= 1");
    if (!(0.0 < eig_low && eig_low < eig_high))
        throw std::invalid_argument("make_random_quadratic: need 0 < eig_low < eig_high");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(eig_low, eig_high);

    Mat Gm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            Gm(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(Gm);
    Mat Q = qr.householderQ();
    // Fix the sign convention so Q is a deterministic function of the seed.
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (R(j, j) < 0.0) Q.col(j) *= -1.0;

    Vec eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = unif(rng);

    QuadraticSpec spec;
    spec.A = Q.transpose() * eigs.asDiagonal() * Q;
    spec.A = (0.5 * (spec.A + spec.A.transpose())).eval();  // exact symmetry
    spec.b = Vec(n);
    for (int i = 0; i < n; ++i) spec.b[i] = gauss(rng);

    Vec xstar = spec.A.ldlt().solve(-spec.b);
    const double opt = 0.5 * xstar.dot(spec.A * xstar) + spec.b.dot(xstar);
    const double L = eigs.maxCoeff();
    const double mu = eigs.minCoeff();
    return {model_from_quadratic(spec, L, mu, xstar, opt), spec};
}

struct ConstantEstimate {
    double L_est = 0.0;
    double mu_est = 0.0;
    bool estimated = true;
    bool mu_known = false;
};

// Power-iteration fallback for models whose constants are not analytically
// known. L_est from the largest Hessian eigenvalue over a few probe points;
// mu_est from a shifted power iteration (largest eigenvalue of L*I - H).
inline ConstantEstimate estimate_constants(const ObjectiveModel& model, int probe_budget) {
    if (probe_budget < 1)
        throw std::invalid_argument("estimate_constants: probe_budget must be >= 1");

    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = model.dimension;
    auto random_vec = [&] {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };

    const int iters = 200;
    double L_est = 0.0;
    std::vector<Vec> probes;
    for (int p = 0; p < probe_budget; ++p)
        probes.push_back(p == 0 ? Vec::Zero(n).eval() : random_vec());

    for (const Vec& x : probes) {
        Vec d = random_vec();
        d.normalize();
        double lambda = 0.0;
        for (int it = 0; it < iters; ++it) {
            Vec hd = model.hessian_vec(x, d);
            lambda = d.dot(hd);
            const double norm = hd.norm();
            if (norm < 1e-300) { lambda = 0.0; break; }
            d = hd / norm;
        }
        L_est = std::max(L_est, lambda);
    }

    ConstantEstimate est;
    est.L_est = L_est;
    if (L_est <= 0.0) return est;  // no curvature anywhere

    // Largest eigenvalue of shift*I - H equals shift - mu_min.
    const double shift = L_est * (1.0 + 1e-8);
    double gap_max = 0.0;
    for (const Vec& x : probes) {
        Vec d = random_vec();
        d.normalize();
        double lambda = 0.0;
        for (int it = 0; it < iters; ++it) {
            Vec sd = shift * d - model.hessian_vec(x, d);
            lambda = d.dot(sd);
            const double norm = sd.norm();
            if (norm < 1e-300) { lambda = 0.0; break; }
            d = sd / norm;
        }
        gap_max = std::max(gap_max, lambda);
    }
    double mu = shift - gap_max;
    if (mu > 1e-10 * L_est) {
        est.mu_est = mu;
        est.mu_known = true;
    }
    return est;
}

} // namespace dinavd
