// Experiment runner: single/restarted trajectories, the discrete IGAHD
// algorithm, rate certificates, and named experiment recipes with CSV/JSON
// artifacts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dinavd/analysis.hpp"
#include "dinavd/experiments.hpp"
#include "dinavd/igahd.hpp"
#include "dinavd/problems.hpp"
#include "dinavd/restart.hpp"
#include "dinavd/theory.hpp"

using json = nlohmann::json;
using namespace dinavd;

namespace {

ObjectiveModel load_problem(const std::string& spec) {
    return experiments::problem_from_config(json::parse(spec));
}

json certificate_to_json(const theory::RateCertificate& c) {
    return {{"alpha", c.alpha},   {"beta", c.beta},
            {"L", c.L},           {"mu", c.mu},
            {"tau1", c.tau1},     {"tau2", c.tau2},
            {"tau3", c.tau3},     {"tau_star", c.tau_star},
            {"psi_at_tau_star", c.psi_at_tau_star},
            {"Q", c.Q},           {"tau_upper", c.tau_upper},
            {"C", c.C},           {"K", c.K}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speed-restarted inertial dynamics with Hessian damping"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    app.add_option("--out", out_dir, "Artifact output directory")->capture_default_str();

    // --- ode ---
    auto* ode = app.add_subcommand("ode", "Integrate a (restarted) trajectory");
    std::string ode_problem = R"({"kind": "diag_rho", "rho": 10})";
    double ode_alpha = 3.1, ode_beta = 0.25, ode_t_start = 1.0, ode_t_end = 25.0;
    double tol_rel = 1e-9, tol_abs = 1e-12, delta_frac = 1e-4, fixed_tau = 0.0;
    std::string ode_policy = "speed", ode_velocity = "zero";
    ode->add_option("--problem", ode_problem, "Problem config (JSON)")->capture_default_str();
    ode->add_option("--alpha", ode_alpha)->capture_default_str();
    ode->add_option("--beta", ode_beta)->capture_default_str();
    ode->add_option("--t-start", ode_t_start)->capture_default_str();
    ode->add_option("--t-end", ode_t_end)->capture_default_str();
    ode->add_option("--policy", ode_policy, "none|speed|warm_then_speed|fixed_tau")
        ->capture_default_str();
    ode->add_option("--fixed-tau", fixed_tau, "Leg duration for fixed_tau");
    ode->add_option("--velocity", ode_velocity, "Initial velocity: zero|neg_beta_grad")
        ->capture_default_str();
    ode->add_option("--tol_rel", tol_rel)->capture_default_str();
    ode->add_option("--tol_abs", tol_abs)->capture_default_str();
    ode->add_option("--delta_frac", delta_frac)->capture_default_str();

    // --- igahd ---
    auto* ig = app.add_subcommand("igahd", "Run the discrete restarted algorithm");
    ig->set_help_flag("--help", "Print this help message and exit");  // frees -h for the step size
    std::string ig_problem = R"({"kind": "diag_rho", "rho": 10})";
    double ig_alpha = 3.1, ig_beta = -1.0, ig_h = -1.0;
    int ig_kmin = 10, ig_N = 1000;
    std::uint64_t ig_seed = 1;
    std::string ig_policy = "speed";
    ig->add_option("--problem", ig_problem)->capture_default_str();
    ig->add_option("--alpha", ig_alpha)->capture_default_str();
    ig->add_option("--beta", ig_beta, "Defaults to h");
    ig->add_option("--h", ig_h, "Defaults to 1/sqrt(L)");
    ig->add_option("--kmin", ig_kmin)->capture_default_str();
    ig->add_option("--N", ig_N)->capture_default_str();
    ig->add_option("--policy", ig_policy, "none|speed|warm_then_speed")->capture_default_str();
    ig->add_option("--seed", ig_seed, "Seed for the random start")->capture_default_str();

    // --- cert ---
    auto* cert = app.add_subcommand("cert", "Emit a rate certificate as JSON");
    double c_alpha = 3.0, c_beta = 0.0, c_L = 1.0, c_mu = 1.0;
    bool c_optimize = false;
    cert->add_option("--alpha", c_alpha)->capture_default_str();
    cert->add_option("--beta", c_beta)->capture_default_str();
    cert->add_option("--L", c_L)->capture_default_str();
    cert->add_option("--mu", c_mu)->capture_default_str();
    cert->add_flag("--optimize", c_optimize, "Search tau* maximizing K over (0, tau3]");

    // --- experiment ---
    auto* exp = app.add_subcommand("experiment", "Run a named recipe");
    std::string recipe;
    std::string config_file;
    exp->add_option("recipe", recipe,
                    "fig_avd_r3|fig_cont|table_values_t25|igahd_diag3|igahd_random500");
    exp->add_option("--config", config_file, "JSON config file (overrides recipe presets)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ode) {
            ObjectiveModel model = load_problem(ode_problem);
            DynamicsParams p;
            p.alpha = ode_alpha;
            p.beta = ode_beta;
            p.system = ode_beta == 0.0 ? SystemKind::Avd : SystemKind::DinAvd;
            p.t_start = ode_t_start;
            p.x_start = Vec::Ones(model.dimension);
            p.v_start = ode_velocity == "neg_beta_grad"
                            ? (-ode_beta * model.gradient(p.x_start)).eval()
                            : Vec::Zero(model.dimension).eval();
            RestartOptions opts;
            opts.tol = {tol_rel, tol_abs};
            opts.delta_frac = delta_frac;
            opts.fixed_tau = fixed_tau;
            if (ode_policy == "none") opts.policy = RestartPolicy::None;
            else if (ode_policy == "speed") opts.policy = RestartPolicy::Speed;
            else if (ode_policy == "warm_then_speed") opts.policy = RestartPolicy::WarmThenSpeed;
            else if (ode_policy == "fixed_tau") opts.policy = RestartPolicy::FixedTau;
            else throw experiments::ConfigError("unknown policy " + ode_policy);

            auto traj = build_restarted(p.x_start, p, model, ode_t_end, opts);
            std::filesystem::create_directories(out_dir);
            experiments::write_trajectory_csv(traj, out_dir + "/trajectory.csv");
            json summary = {{"segments", traj.segments.size()},
                            {"restarts", traj.restart_times.size()},
                            {"t_end", traj.t_end_global},
                            {"final_gap", chi_eval(traj, traj.t_end_global).phi_gap},
                            {"precision_floor", traj.precision_floor}};
            std::cout << summary.dump(2) << '\n';
        } else if (*ig) {
            ObjectiveModel model = load_problem(ig_problem);
            IgahdParams p;
            p.alpha = ig_alpha;
            p.h = ig_h > 0.0 ? ig_h : 1.0 / std::sqrt(model.lipschitz_L);
            p.beta = ig_beta >= 0.0 ? ig_beta : p.h;
            p.k_min = ig_kmin;
            p.N = ig_N;
            std::mt19937_64 rng(ig_seed ^ 0xd1b54a32d192ed03ull);
            std::uniform_real_distribution<double> unif(-1.0, 1.0);
            Vec x0(model.dimension);
            for (int i = 0; i < model.dimension; ++i) x0[i] = unif(rng);
            IgahdPolicy policy = IgahdPolicy::Speed;
            if (ig_policy == "none") policy = IgahdPolicy::None;
            else if (ig_policy == "warm_then_speed") policy = IgahdPolicy::WarmThenSpeed;
            else if (ig_policy != "speed")
                throw experiments::ConfigError("unknown policy " + ig_policy);
            auto log = run_igahd(x0, x0, p, model, policy);
            std::filesystem::create_directories(out_dir);
            experiments::write_iterates_csv(log, out_dir + "/iterates.csv");
            json summary = {{"best_gap", log.best_gap},
                            {"restarts", log.restart_indices.size()},
                            {"gap_vs_best_seen", log.gap_vs_best_seen}};
            std::cout << summary.dump(2) << '\n';
        } else if (*cert) {
            auto c = theory::certificate(c_alpha, c_beta, c_L, c_mu,
                                         c_optimize ? theory::TauChoice::Optimize
                                                    : theory::TauChoice::Tau3);
            std::cout << certificate_to_json(c).dump(2) << '\n';
        } else if (*exp) {
            json config;
            if (!config_file.empty()) {
                std::ifstream in(config_file);
                if (!in) throw experiments::ConfigError("cannot read " + config_file);
                in >> config;
            }
            if (!recipe.empty()) config["recipe"] = recipe;
            auto outcome = experiments::run_experiment(config, out_dir);
            std::cout << outcome.manifest.dump(2) << '\n';
            return outcome.checks_passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
