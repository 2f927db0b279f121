#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dinavd/igahd.hpp"
#include "dinavd/problems.hpp"
#include "reference.hpp"

using namespace dinavd;

namespace {

ObjectiveModel quad_1d(double L = 1.0) {
    QuadraticSpec spec;
    spec.A = Mat::Constant(1, 1, L);
    spec.b = Vec::Zero(1);
    return model_from_quadratic(spec, L, L, Vec::Zero(1), 0.0);
}

} // namespace

TEST_CASE("igahd_step: hand values") {
    auto m = quad_1d();
    IgahdParams p;
    p.alpha = 3.0;
    p.beta = 0.0;
    p.h = 1.0;

    // local_k = 1: momentum coefficient is 1 - 3 = -2, so
    // y = 1 - 2*(1 - 0.5) = 0 and the gradient step stays at 0.
    CHECK(igahd_step(Vec::Ones(1), Vec::Constant(1, 0.5), 1, p, m)[0] == 0.0);

    // local_k = 3: coefficient 0, y = x_k, x+ = x_k - h^2 x_k.
    p.h = 0.5;
    const double expect = 1.0 - 0.25;
    CHECK(igahd_step(Vec::Ones(1), Vec::Constant(1, 0.3), 3, p, m)[0]
          == doctest::Approx(expect).epsilon(1e-15));

    // beta term: y picks up -beta*h*(g(x_k) - g(x_{k-1})).
    p.beta = 1.0;
    const double y = 1.0 + 0.0 * (1.0 - 0.3) - 1.0 * 0.5 * (1.0 - 0.3);
    CHECK(igahd_step(Vec::Ones(1), Vec::Constant(1, 0.3), 3, p, m)[0]
          == doctest::Approx(y - 0.25 * y).epsilon(1e-15));

    // The minimizer is a fixed point.
    CHECK(igahd_step(Vec::Zero(1), Vec::Zero(1), 5, p, m).norm() == 0.0);

    CHECK_THROWS_AS(igahd_step(Vec::Ones(1), Vec::Ones(1), 0, p, m), std::invalid_argument);
    IgahdParams bad = p;
    bad.h = 0.0;
    CHECK_THROWS_AS(igahd_step(Vec::Ones(1), Vec::Ones(1), 1, bad, m), std::invalid_argument);
}

TEST_CASE("run_igahd: defaults, fixed point, and log consistency") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.N = 200;
    auto log = run_igahd(Vec::Ones(3), Vec::Ones(3), p, m, IgahdPolicy::Speed);
    CHECK(log.params.h == doctest::Approx(0.1).epsilon(1e-15));  // 1/sqrt(100)
    CHECK(log.iterates.size() == 200);
    CHECK_FALSE(log.gap_vs_best_seen);

    // restart_indices agree with the per-iterate flags.
    std::vector<int> fired;
    for (const auto& it : log.iterates)
        if (it.restarted) fired.push_back(it.global_k);
    CHECK(fired == log.restart_indices);

    // best_gap really is the running minimum.
    double best = m.value(Vec::Ones(3));
    for (const auto& it : log.iterates) best = std::min(best, it.phi_gap);
    CHECK(log.best_gap == best);

    // Start at the minimizer: nothing moves.
    auto still = run_igahd(Vec::Zero(3), Vec::Zero(3), p, m, IgahdPolicy::None);
    CHECK(still.x_final.norm() == 0.0);
    CHECK(still.best_gap == 0.0);
}

TEST_CASE("run_igahd: k_min beyond N disables speed resets") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.N = 300;
    p.k_min = 301;
    auto with = run_igahd(Vec::Ones(3), Vec::Ones(3), p, m, IgahdPolicy::Speed);
    auto none = run_igahd(Vec::Ones(3), Vec::Ones(3), p, m, IgahdPolicy::None);
    CHECK(with.restart_indices.empty());
    CHECK((with.x_final - none.x_final).norm() == 0.0);
    for (std::size_t i = 0; i < with.iterates.size(); ++i)
        CHECK(with.iterates[i].phi_gap == none.iterates[i].phi_gap);
}

TEST_CASE("run_igahd: step norms increase inside a leg past k_min") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.N = 1000;
    auto log = run_igahd(Vec::Ones(3), Vec::Ones(3), p, m, IgahdPolicy::Speed);
    REQUIRE(log.restart_indices.size() >= 2);
    for (std::size_t i = 1; i < log.iterates.size(); ++i) {
        const auto& cur = log.iterates[i];
        const auto& prev = log.iterates[i - 1];
        if (!cur.restarted && !prev.restarted && cur.local_k > p.k_min + 1)
            CHECK(cur.step_norm >= prev.step_norm);
    }
}

TEST_CASE("run_igahd matches an independently written restarted iteration") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.alpha = 3.1;
    p.beta = 0.0;
    p.h = 0.1;
    p.k_min = 10;
    p.N = 500;
    const Vec x0 = Vec::Ones(3);
    const Vec x1 = Vec::Constant(3, 0.9);

    auto log = run_igahd(x0, x1, p, m, IgahdPolicy::Speed);
    auto ref = testing::nesterov_speed_restart(x0, x1, p.alpha, p.h, p.k_min, p.N, m);
    REQUIRE(ref.size() == log.iterates.size());
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(std::abs(m.value(ref[i]) - log.iterates[i].phi_gap)
              <= 1e-12 * (1.0 + m.value(ref[i])));
    CHECK((log.x_final - ref.back()).norm() <= 1e-12 * (1.0 + ref.back().norm()));
}

TEST_CASE("speed and warm restarts beat the plain run") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.alpha = 3.1;
    p.beta = 0.1;
    p.N = 1000;
    const Vec x0 = Vec::Ones(3);

    auto none = run_igahd(x0, x0, p, m, IgahdPolicy::None);
    auto speed = run_igahd(x0, x0, p, m, IgahdPolicy::Speed);
    auto warm = run_igahd(x0, x0, p, m, IgahdPolicy::WarmThenSpeed);

    CHECK(speed.best_gap < 1e-2 * none.best_gap);
    CHECK(warm.best_gap < 1e-2 * none.best_gap);
    CHECK_FALSE(speed.restart_indices.empty());
    CHECK_FALSE(warm.restart_indices.empty());
    // The warm variant's first reset comes from the value-increase test, not
    // the step-norm one, so the two runs generally diverge there.
    CHECK(warm.restart_indices != speed.restart_indices);
}

TEST_CASE("strict reset keeps the momentum anchor") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.N = 400;
    IgahdParams ps = p;
    ps.strict_reset = true;
    const Vec x0 = Vec::Ones(3);
    auto soft = run_igahd(x0, x0, p, m, IgahdPolicy::Speed);
    auto strict = run_igahd(x0, x0, ps, m, IgahdPolicy::Speed);
    REQUIRE_FALSE(soft.restart_indices.empty());
    REQUIRE_FALSE(strict.restart_indices.empty());
    // Identical until the first reset, different right after it.
    const int first = soft.restart_indices.front();
    if (first == strict.restart_indices.front() && first < p.N)
        CHECK((soft.iterates[first].phi_gap != strict.iterates[first].phi_gap
               || soft.x_final != strict.x_final));
}

TEST_CASE("unknown optimal value switches to gaps against the best seen") {
    QuadraticSpec spec;
    spec.A = Mat::Identity(2, 2);
    spec.b = Vec::Ones(2);
    auto m = model_from_quadratic(spec, 1.0, 1.0, std::nullopt, std::nullopt);
    REQUIRE_FALSE(m.optimal_value.has_value());

    IgahdParams p;
    p.N = 300;
    auto log = run_igahd(Vec::Ones(2), Vec::Ones(2), p, m, IgahdPolicy::Speed);
    CHECK(log.gap_vs_best_seen);
    double min_gap = std::numeric_limits<double>::infinity();
    for (const auto& it : log.iterates) min_gap = std::min(min_gap, it.phi_gap);
    CHECK(min_gap == 0.0);
}

TEST_CASE("run_igahd input validation") {
    auto m = make_diag_rho(10.0);
    IgahdParams p;
    p.N = 0;
    CHECK_THROWS_AS(run_igahd(Vec::Ones(3), Vec::Ones(3), p, m, IgahdPolicy::None),
                    std::invalid_argument);
    IgahdParams q;
    q.k_min = 0;
    CHECK_THROWS_AS(run_igahd(Vec::Ones(3), Vec::Ones(3), q, m, IgahdPolicy::None),
                    std::invalid_argument);
    ObjectiveModel no_L = m;
    no_L.lipschitz_L = 0.0;
    IgahdParams r;
    CHECK_THROWS_AS(run_igahd(Vec::Ones(3), Vec::Ones(3), r, no_L, IgahdPolicy::None),
                    std::invalid_argument);
}
