#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "rmg/dr_nvi.hpp"
#include "rmg/evaluation.hpp"
#include "rmg/instances.hpp"
#include "rmg/io.hpp"
#include "rmg/sampler.hpp"
#include "rmg/version.hpp"

namespace rmg {

inline constexpr std::uint64_t kDefaultSeed = 0;

namespace detail {

inline double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Least-squares slope of ln(y) on ln(x); y values are floored at 1e-12 so a
/// gap that happens to hit zero cannot blow up the fit.
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t m = xs.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(m), ly(m);
    for (std::size_t k = 0; k < m; ++k) {
        lx[k] = std::log(xs[k]);
        ly[k] = std::log(std::max(ys[k], 1e-12));
        mx += lx[k];
        my += ly[k];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        num += (lx[k] - mx) * (ly[k] - my);
        den += (lx[k] - mx) * (lx[k] - mx);
    }
    return num / den;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

inline EqKind parse_kind(const std::string& s) {
    if (s == "nash") return EqKind::Nash;
    if (s == "ce") return EqKind::CE;
    if (s == "cce") return EqKind::CCE;
    throw ValidationError("unknown equilibrium kind '" + s + "' (want nash, ce, or cce)");
}

inline std::string format_csv_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace detail

// --- solve -----------------------------------------------------------------

struct SolveReport {
    DrNviResult result;
    json output;
};

/// Runs DR-NVI on a game and packages policy, values, and per-stage certified
/// gaps into a machine-readable report.
inline SolveReport solve_game(const RobustMarkovGame& game, EqKind kind, double sub_tol,
                              int workers = 1, long max_iters = kDefaultEqMaxIters,
                              const json& config_echo = json::object()) {
    SolveReport rep;
    rep.result = dr_nvi(game, kind, sub_tol, workers, max_iters);
    json j;
    j["tool_version"] = kVersion;
    j["config"] = config_echo;
    j["config"]["kind"] = to_string(kind);
    j["config"]["sub_tol"] = sub_tol;
    j["config"]["workers"] = workers;
    j["policy"] = policy_to_json(rep.result.policy);
    json values = json::array();
    for (int i = 0; i < game.agent_count(); ++i) {
        json vi = json::array();
        for (int h = 0; h <= game.horizon; ++h) {
            auto sl = rep.result.v.slice(i, h);
            vi.push_back(json(std::vector<double>(sl.begin(), sl.end())));
        }
        values.push_back(std::move(vi));
    }
    j["values"] = std::move(values);
    json gaps = json::array(), iters = json::array();
    for (int h = 0; h < game.horizon; ++h) {
        json gh = json::array(), ih = json::array();
        for (int s = 0; s < game.state_count; ++s) {
            gh.push_back(rep.result.stage_gap[static_cast<std::size_t>(h) * game.state_count + s]);
            ih.push_back(rep.result.stage_iters[static_cast<std::size_t>(h) * game.state_count + s]);
        }
        gaps.push_back(std::move(gh));
        iters.push_back(std::move(ih));
    }
    j["stage_gaps"] = std::move(gaps);
    j["stage_iterations"] = std::move(iters);
    rep.output = std::move(j);
    return rep;
}

inline SolveReport cmd_solve(const std::string& game_file, const std::string& kind,
                             double sub_tol, const std::string& out_file, int workers = 1) {
    RobustMarkovGame game = load_game(game_file);
    validate(game);
    json echo;
    echo["game"] = game_file;
    SolveReport rep = solve_game(game, detail::parse_kind(kind), sub_tol, workers,
                                 kDefaultEqMaxIters, echo);
    if (!out_file.empty()) detail::write_file(out_file, rep.output.dump(2) + "\n");
    return rep;
}

// --- eval ------------------------------------------------------------------

inline json cmd_eval(const std::string& game_file, const std::string& policy_file,
                     const std::string& kind, const std::string& out_file, int workers = 1) {
    RobustMarkovGame game = load_game(game_file);
    validate(game);
    JointPolicy pi = load_policy(policy_file);
    validate(pi);
    check_compatible(game, pi);
    const EqKind k = detail::parse_kind(kind);
    json j;
    j["tool_version"] = kVersion;
    j["config"] = {{"game", game_file}, {"policy", policy_file}, {"kind", kind}, {"workers", workers}};
    j["gap"] = gap_of_kind(game, pi, k, workers);
    const ValueTensor v = robust_policy_eval(game, pi, workers);
    json values = json::array();
    for (int i = 0; i < game.agent_count(); ++i) {
        json vi = json::array();
        for (int h = 0; h <= game.horizon; ++h) {
            auto sl = v.slice(i, h);
            vi.push_back(json(std::vector<double>(sl.begin(), sl.end())));
        }
        values.push_back(std::move(vi));
    }
    j["values"] = std::move(values);
    if (!out_file.empty()) detail::write_file(out_file, j.dump(2) + "\n");
    return j;
}

// --- sweeps ----------------------------------------------------------------

struct SweepRow {
    double x = 0.0;  // N or sigma
    std::uint64_t seed = 0;
    double gap = 0.0;
    double wall_ms = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = 0.0;  // log-log slope of median gap vs N (sample sweep only)
    std::string csv;
};

/// One sample-complexity trial: draw N samples per cell, estimate the model,
/// solve it, and certify the returned policy's gap on the true game.
inline SweepRow sweep_trial(const RobustMarkovGame& game, EqKind kind, double sub_tol,
                            long long N, std::uint64_t seed, long max_iters) {
    SweepRow row;
    row.x = static_cast<double>(N);
    row.seed = seed;
    const double t0 = detail::now_ms();
    const SampleDataset data = draw(game, N, seed);
    const RobustMarkovGame emp = empirical_game(game, data);
    const DrNviResult sol = dr_nvi(emp, kind, sub_tol, 1, max_iters);
    row.gap = gap_of_kind(game, sol.policy, kind);
    row.wall_ms = detail::now_ms() - t0;
    return row;
}

/// gap-vs-N sweep: every (N, seed) pair becomes one CSV row; a trailing
/// summary row carries the log-log least-squares slope of the median gap.
/// Trials are deterministic given (N, seed), so the worker pool cannot change
/// the results, and rows are sorted before writing.
inline SweepResult run_sweep(const RobustMarkovGame& game, EqKind kind, double sub_tol,
                             const std::vector<long long>& n_list, int seeds,
                             std::uint64_t base_seed, int workers = 1,
                             long max_iters = kDefaultEqMaxIters,
                             const json& config_echo = json::object()) {
    if (n_list.empty()) throw ValidationError("sweep: empty N list");
    for (std::size_t k = 1; k < n_list.size(); ++k)
        if (n_list[k] <= n_list[k - 1]) throw ValidationError("sweep: N list must be ascending");
    if (seeds < 1) throw ValidationError("sweep: need at least one seed");

    SweepResult out;
    out.rows.resize(n_list.size() * static_cast<std::size_t>(seeds));
    parallel_for(static_cast<long long>(out.rows.size()), workers, [&](long long k) {
        const std::size_t ni = static_cast<std::size_t>(k) / static_cast<std::size_t>(seeds);
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k % seeds);
        out.rows[static_cast<std::size_t>(k)] =
            sweep_trial(game, kind, sub_tol, n_list[ni], seed, max_iters);
    });
    std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.seed < b.seed;
    });

    std::vector<double> xs, med;
    for (long long n : n_list) {
        std::vector<double> gaps;
        for (const auto& r : out.rows)
            if (r.x == static_cast<double>(n)) gaps.push_back(r.gap);
        xs.push_back(static_cast<double>(n));
        med.push_back(detail::median(std::move(gaps)));
    }
    out.slope = detail::loglog_slope(xs, med);

    std::ostringstream csv;
    csv << "# tool_version=" << kVersion << "\n";
    for (auto it = config_echo.begin(); it != config_echo.end(); ++it)
        csv << "# " << it.key() << "=" << it.value().dump() << "\n";
    csv << "# kind=" << to_string(kind) << " sub_tol=" << sub_tol << " seeds=" << seeds
        << " base_seed=" << base_seed << "\n";
    csv << "N,seed,gap_" << to_string(kind) << ",wall_ms\n";
    for (const auto& r : out.rows)
        csv << static_cast<long long>(r.x) << "," << r.seed << "," << detail::format_csv_double(r.gap)
            << "," << detail::format_csv_double(r.wall_ms) << "\n";
    csv << "slope,," << detail::format_csv_double(out.slope) << ",\n";
    out.csv = csv.str();
    return out;
}

inline SweepResult cmd_sweep(const std::string& game_file, const std::string& kind,
                             double sub_tol, const std::vector<long long>& n_list, int seeds,
                             const std::string& out_csv, std::uint64_t base_seed = kDefaultSeed,
                             int workers = 1) {
    RobustMarkovGame game = load_game(game_file);
    validate(game);
    json echo;
    echo["game"] = game_file;
    SweepResult res = run_sweep(game, detail::parse_kind(kind), sub_tol, n_list, seeds, base_seed,
                                workers, kDefaultEqMaxIters, echo);
    if (!out_csv.empty()) detail::write_file(out_csv, res.csv);
    return res;
}

/// Fixed-N sweep over a shared uncertainty level applied to every agent.
inline SweepResult run_sigma_sweep(const RobustMarkovGame& game, EqKind kind, double sub_tol,
                                   long long N, const std::vector<double>& sigma_list, int seeds,
                                   std::uint64_t base_seed, int workers = 1,
                                   long max_iters = kDefaultEqMaxIters,
                                   const json& config_echo = json::object()) {
    if (sigma_list.empty()) throw ValidationError("sigma-sweep: empty sigma list");
    if (seeds < 1) throw ValidationError("sigma-sweep: need at least one seed");
    SweepResult out;
    out.rows.resize(sigma_list.size() * static_cast<std::size_t>(seeds));
    parallel_for(static_cast<long long>(out.rows.size()), workers, [&](long long k) {
        const std::size_t si = static_cast<std::size_t>(k) / static_cast<std::size_t>(seeds);
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k % seeds);
        RobustMarkovGame g = game;
        for (double& s : g.sigma) s = sigma_list[si];
        SweepRow row = sweep_trial(g, kind, sub_tol, N, seed, max_iters);
        row.x = sigma_list[si];
        out.rows[static_cast<std::size_t>(k)] = row;
    });
    std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.seed < b.seed;
    });
    std::ostringstream csv;
    csv << "# tool_version=" << kVersion << "\n";
    for (auto it = config_echo.begin(); it != config_echo.end(); ++it)
        csv << "# " << it.key() << "=" << it.value().dump() << "\n";
    csv << "# kind=" << to_string(kind) << " sub_tol=" << sub_tol << " N=" << N
        << " seeds=" << seeds << " base_seed=" << base_seed << "\n";
    csv << "sigma,seed,gap_" << to_string(kind) << ",wall_ms\n";
    for (const auto& r : out.rows)
        csv << detail::format_csv_double(r.x) << "," << r.seed << ","
            << detail::format_csv_double(r.gap) << "," << detail::format_csv_double(r.wall_ms)
            << "\n";
    out.csv = csv.str();
    return out;
}

inline SweepResult cmd_sigma_sweep(const std::string& game_file, const std::string& kind,
                                   double sub_tol, long long N,
                                   const std::vector<double>& sigma_list, int seeds,
                                   const std::string& out_csv,
                                   std::uint64_t base_seed = kDefaultSeed, int workers = 1) {
    RobustMarkovGame game = load_game(game_file);
    validate(game);
    json echo;
    echo["game"] = game_file;
    SweepResult res = run_sigma_sweep(game, detail::parse_kind(kind), sub_tol, N, sigma_list,
                                      seeds, base_seed, workers, kDefaultEqMaxIters, echo);
    if (!out_csv.empty()) detail::write_file(out_csv, res.csv);
    return res;
}

// --- worked instances ------------------------------------------------------

inline json cmd_fishing(const std::string& mode, double p, double sigma, int horizon,
                        const std::string& out_json, std::uint64_t seed = kDefaultSeed) {
    const bool robust = mode == "robust";
    if (!robust && mode != "standard")
        throw ValidationError("fishing mode must be 'standard' or 'robust'");
    const FishingSolution sol = fishing_solve(p, horizon, robust, sigma);
    json j;
    j["tool_version"] = kVersion;
    j["config"] = {{"mode", mode}, {"p", p},    {"sigma", robust ? sigma : 0.0},
                   {"H", horizon}, {"seed", seed}};
    j["p_effective"] = sol.p_effective;
    json profiles = json::array();
    for (int h = 0; h < horizon; ++h)
        profiles.push_back({sol.profile[static_cast<std::size_t>(h)][0],
                            sol.profile[static_cast<std::size_t>(h)][1]});
    j["profile_per_step"] = std::move(profiles);
    j["profiles_state_independent"] = true;
    j["values"] = {{"agent1", sol.v1}, {"agent2", sol.v2}};
    const std::array<int, 2> first = sol.profile[0];
    j["rollout"] = {{"profile", {first[0], first[1]}},
                    {"seed", seed},
                    {"terminal_state", fishing_rollout(p, horizon, first, seed)}};
    if (!out_json.empty()) detail::write_file(out_json, j.dump(2) + "\n");
    return j;
}

struct HardInstanceReport {
    double max_gap_error = 0.0;   // |dr_nvi gap - closed form| over h
    double max_value_error = 0.0; // |V(x_w)|, |V(y_w)| vs closed-form recursion
    bool policy_match = true;     // X-state actions agree with the closed form
    json output;
};

/// Builds one hard instance, solves it with DR-NVI on the exact nominal
/// kernel, and reports agreement with the closed-form optimal policy and
/// value gap.
inline HardInstanceReport run_hard_instance(const HardInstanceSpec& raw, int workers = 1) {
    const HardInstanceSpec spec = finalize(raw);
    const RobustMarkovGame game = build_hard_rmdp(spec);
    const HardClosedForm cf = hard_rmdp_closed_form(spec);
    const DrNviResult sol = dr_nvi(game, EqKind::Nash, 1e-9, workers);

    const int W = spec.S * spec.A;
    const int xw = hard_state_x(spec, spec.w);
    const int yw = hard_state_y(spec, spec.w);
    HardInstanceReport rep;
    for (int h = 0; h < spec.H; ++h) {
        const double gap = sol.v.at(0, h, yw) - sol.v.at(0, h, xw);
        rep.max_gap_error =
            std::max(rep.max_gap_error, std::abs(gap - cf.gap_h[static_cast<std::size_t>(h)]));
        for (int s = 0; s < W; ++s) {
            const auto row = sol.policy.row(h, s);
            int played = 0;
            for (long long a = 0; a < 2; ++a)
                if (row[static_cast<std::size_t>(a)] > 0.5) played = static_cast<int>(a);
            if (played != cf.action[static_cast<std::size_t>(h) * game.state_count + s])
                rep.policy_match = false;
        }
    }
    rep.max_value_error = std::max(std::abs(sol.v.at(0, 0, xw) - cf.value_x_w),
                                   std::abs(sol.v.at(0, 0, yw) - cf.value_y_w));

    json j;
    j["tool_version"] = kVersion;
    j["config"] = {{"S", spec.S},      {"A", spec.A},   {"H", spec.H},
                   {"sigma", spec.sigma}, {"eps", spec.eps}, {"w", spec.w},
                   {"c0", spec.c0},    {"c1", spec.c1}, {"c2", spec.c2},
                   {"c5", spec.c5}};
    j["derived"] = {{"p", spec.p}, {"delta", spec.delta}, {"q", spec.q}};
    j["theta"] = spec.theta;
    j["closed_form_gap_per_step"] = cf.gap_h;
    j["max_gap_error"] = rep.max_gap_error;
    j["max_value_error"] = rep.max_value_error;
    j["policy_match"] = rep.policy_match;
    j["value_x_w"] = sol.v.at(0, 0, xw);
    j["value_y_w"] = sol.v.at(0, 0, yw);
    rep.output = std::move(j);
    return rep;
}

inline HardInstanceReport cmd_hard_instance(const HardInstanceSpec& spec,
                                            const std::string& out_json, int workers = 1) {
    HardInstanceReport rep = run_hard_instance(spec, workers);
    if (!out_json.empty()) detail::write_file(out_json, rep.output.dump(2) + "\n");
    return rep;
}

inline void cmd_validate(const std::string& game_file) {
    RobustMarkovGame game = load_game(game_file);
    validate(game);
}

}  // namespace rmg
