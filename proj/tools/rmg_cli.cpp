#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmg/harness.hpp"
#include "rmg/version.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("RMG_SOLVE_SEED")) return std::strtoull(env, nullptr, 10);
    return rmg::kDefaultSeed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver and experiment harness for finite-horizon robust Markov games "
                 "with TV uncertainty sets"};
    app.set_version_flag("--version", rmg::kVersion);
    app.require_subcommand(1);

    std::string game_file, policy_file, out_file, kind = "cce", mode = "standard";
    double sub_tol = 1e-3;
    long long n = 1024;
    std::vector<long long> n_list;
    std::vector<double> sigma_list;
    double sigma = 0.0, p = 0.049;
    int seeds = 1, workers = 1, horizon = 100;
    std::uint64_t seed = default_seed();

    auto* solve = app.add_subcommand("solve", "Run DR-NVI on a game file");
    solve->add_option("--game", game_file, "game JSON file")->required();
    solve->add_option("--kind", kind, "equilibrium kind: nash, ce, cce");
    solve->add_option("--sub-tol", sub_tol, "stage-game certification tolerance");
    solve->add_option("--out", out_file, "output JSON path");
    solve->add_option("--workers", workers, "worker threads");

    auto* eval = app.add_subcommand("eval", "Certify a policy's robust equilibrium gap");
    eval->add_option("--game", game_file, "game JSON file")->required();
    eval->add_option("--policy", policy_file, "policy JSON file")->required();
    eval->add_option("--kind", kind, "gap kind: nash, ce, cce");
    eval->add_option("--out", out_file, "output JSON path");
    eval->add_option("--workers", workers, "worker threads");

    auto* sweep = app.add_subcommand("sweep", "Sample-complexity sweep over N");
    sweep->add_option("--game", game_file, "game JSON file")->required();
    sweep->add_option("--kind", kind, "equilibrium kind");
    sweep->add_option("--sub-tol", sub_tol, "stage-game certification tolerance");
    sweep->add_option("--n-list", n_list, "ascending sample counts per cell")->required();
    sweep->add_option("--seeds", seeds, "number of seeds per N");
    sweep->add_option("--out", out_file, "output CSV path");
    sweep->add_option("--workers", workers, "worker threads");

    auto* ssweep = app.add_subcommand("sigma-sweep", "Gap sweep over a shared uncertainty level");
    ssweep->add_option("--game", game_file, "game JSON file")->required();
    ssweep->add_option("--kind", kind, "equilibrium kind");
    ssweep->add_option("--sub-tol", sub_tol, "stage-game certification tolerance");
    ssweep->add_option("--n", n, "sample count per cell");
    ssweep->add_option("--sigma-list", sigma_list, "uncertainty levels")->required();
    ssweep->add_option("--seeds", seeds, "number of seeds per sigma");
    ssweep->add_option("--out", out_file, "output CSV path");
    ssweep->add_option("--workers", workers, "worker threads");

    std::string export_game;
    auto* fishing = app.add_subcommand("fishing", "Solve the fishing-protection example");
    fishing->add_option("mode", mode, "standard or robust")->required();
    fishing->add_option("--p", p, "nominal environment parameter");
    fishing->add_option("--sigma", sigma, "parametric uncertainty level (robust mode)");
    fishing->add_option("--horizon", horizon, "episode length");
    fishing->add_option("--out", out_file, "output JSON path");
    fishing->add_option("--export-game", export_game,
                        "also write the concrete tabular game (effective parameter substituted)");

    int hi_S = 2, hi_A = 2, hi_H = 16, hi_w = 0, hi_theta = 1;
    double hi_sigma = 0.1, hi_eps = 0.01;
    auto* hard = app.add_subcommand("hard-instance",
                                    "Build a lower-bound instance and check DR-NVI against the "
                                    "closed form");
    hard->add_option("--S", hi_S, "state-count parameter of the family");
    hard->add_option("--A", hi_A, "action-count parameter of the family");
    hard->add_option("--horizon", hi_H, "episode length (>= 16)");
    hard->add_option("--sigma", hi_sigma, "uncertainty level in (0, 1 - c0]");
    hard->add_option("--eps", hi_eps, "target accuracy parameter");
    hard->add_option("--w", hi_w, "distinguished pair index in {0..SA-1}");
    hard->add_option("--theta-index", hi_theta, "codeword index into the Theta set (>= 1)");
    hard->add_option("--out", out_file, "output JSON path");
    hard->add_option("--export-game", export_game, "also write the built tabular game");
    hard->add_option("--workers", workers, "worker threads");

    auto* validate = app.add_subcommand("validate", "Check a game file's invariants");
    validate->add_option("--game", game_file, "game JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            auto rep = rmg::cmd_solve(game_file, kind, sub_tol, out_file, workers);
            std::cout << "solved: H=" << rep.result.policy.horizon
                      << " S=" << rep.result.policy.state_count << " kind=" << kind << "\n";
        } else if (eval->parsed()) {
            auto j = rmg::cmd_eval(game_file, policy_file, kind, out_file, workers);
            std::cout << "gap_" << kind << " = " << j["gap"].get<double>() << "\n";
        } else if (sweep->parsed()) {
            auto res = rmg::cmd_sweep(game_file, kind, sub_tol, n_list, seeds, out_file, seed,
                                      workers);
            std::cout << "rows=" << res.rows.size() << " slope=" << res.slope << "\n";
            if (out_file.empty()) std::cout << res.csv;
        } else if (ssweep->parsed()) {
            auto res = rmg::cmd_sigma_sweep(game_file, kind, sub_tol, n, sigma_list, seeds,
                                            out_file, seed, workers);
            std::cout << "rows=" << res.rows.size() << "\n";
            if (out_file.empty()) std::cout << res.csv;
        } else if (fishing->parsed()) {
            auto j = rmg::cmd_fishing(mode, p, sigma, horizon, out_file, seed);
            if (!export_game.empty()) {
                const double pe = j["p_effective"].get<double>();
                rmg::save_game(rmg::fishing_game(pe, horizon), export_game);
            }
            std::cout << "profile at h=1: (" << j["profile_per_step"][0][0] << ","
                      << j["profile_per_step"][0][1] << ")  terminal state "
                      << j["rollout"]["terminal_state"] << "\n";
        } else if (hard->parsed()) {
            rmg::HardInstanceSpec spec;
            spec.S = hi_S;
            spec.A = hi_A;
            spec.H = hi_H;
            spec.sigma = hi_sigma;
            spec.eps = hi_eps;
            spec.w = hi_w;
            const rmg::ThetaSet ts = rmg::build_theta_set(hi_H);
            if (hi_theta < 1 || static_cast<std::size_t>(hi_theta) >= ts.words.size())
                throw rmg::ValidationError("theta-index must select a non-base codeword");
            spec.theta = ts.theta(static_cast<std::size_t>(hi_theta));
            auto rep = rmg::cmd_hard_instance(spec, out_file, workers);
            if (!export_game.empty()) rmg::save_game(rmg::build_hard_rmdp(spec), export_game);
            std::cout << "max gap error " << rep.max_gap_error << ", policy match "
                      << (rep.policy_match ? "yes" : "no") << "\n";
        } else if (validate->parsed()) {
            rmg::cmd_validate(game_file);
            std::cout << "ok\n";
        }
    } catch (const rmg::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const rmg::NashIntractable& e) {
        std::cerr << "intractable: " << e.what() << "\n";
        return 4;
    } catch (const rmg::NonUniqueEquilibrium& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const rmg::ConstructionFailed& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const rmg::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
