#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmg/core.hpp"
#include "rmg/sampler.hpp"

namespace rmg {

using json = nlohmann::json;

namespace detail {

/// Maps a byte offset from nlohmann's parse_error to (line, column).
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline json parse_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col(text, e.byte);
        throw ValidationError(origin + ": parse error at line " + std::to_string(line) +
                              ", column " + std::to_string(col) + ": " + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

}  // namespace detail

// --- game <-> json ---------------------------------------------------------

inline json game_to_json(const RobustMarkovGame& g) {
    json j;
    j["horizon"] = g.horizon;
    j["state_count"] = g.state_count;
    j["action_sizes"] = g.actions.sizes();
    j["sigma"] = g.sigma;
    j["reward_range"] = {g.reward_min, g.reward_max};
    const long long A = g.joint_actions();
    json reward = json::array();
    for (int i = 0; i < g.agent_count(); ++i) {
        json ji = json::array();
        for (int h = 0; h < g.horizon; ++h) {
            json jh = json::array();
            for (int s = 0; s < g.state_count; ++s) {
                json js = json::array();
                for (long long a = 0; a < A; ++a) js.push_back(g.r(i, h, s, a));
                jh.push_back(std::move(js));
            }
            ji.push_back(std::move(jh));
        }
        reward.push_back(std::move(ji));
    }
    j["reward"] = std::move(reward);
    json kernel = json::array();
    for (int h = 0; h < g.horizon; ++h) {
        json jh = json::array();
        for (int s = 0; s < g.state_count; ++s) {
            json js = json::array();
            for (long long a = 0; a < A; ++a) {
                auto row = g.kernel_row(h, s, a);
                js.push_back(json(std::vector<double>(row.begin(), row.end())));
            }
            jh.push_back(std::move(js));
        }
        kernel.push_back(std::move(jh));
    }
    j["kernel"] = std::move(kernel);
    return j;
}

inline RobustMarkovGame game_from_json(const json& j) {
    RobustMarkovGame g;
    try {
        g.horizon = j.at("horizon").get<int>();
        g.state_count = j.at("state_count").get<int>();
        if (g.horizon < 1 || g.state_count < 1)
            throw ShapeMismatch("horizon and state_count must be positive");
        g.actions = JointActionSpace(j.at("action_sizes").get<std::vector<int>>());
        g.sigma = j.at("sigma").get<std::vector<double>>();
        const auto range = j.at("reward_range").get<std::vector<double>>();
        if (range.size() != 2) throw ValidationError("reward_range must have two entries");
        g.reward_min = range[0];
        g.reward_max = range[1];
        const long long A = g.joint_actions();
        const int n = g.agent_count();
        g.reward.reserve(static_cast<std::size_t>(n) * g.horizon * g.state_count * A);
        const json& rw = j.at("reward");
        for (int i = 0; i < n; ++i)
            for (int h = 0; h < g.horizon; ++h)
                for (int s = 0; s < g.state_count; ++s) {
                    const json& row = rw.at(static_cast<std::size_t>(i))
                                          .at(static_cast<std::size_t>(h))
                                          .at(static_cast<std::size_t>(s));
                    if (static_cast<long long>(row.size()) != A)
                        throw ShapeMismatch("reward row has wrong length");
                    for (const auto& v : row) g.reward.push_back(v.get<double>());
                }
        const json& kn = j.at("kernel");
        g.kernel.reserve(static_cast<std::size_t>(g.horizon) * g.state_count * A * g.state_count);
        for (int h = 0; h < g.horizon; ++h)
            for (int s = 0; s < g.state_count; ++s)
                for (long long a = 0; a < A; ++a) {
                    const json& row = kn.at(static_cast<std::size_t>(h))
                                          .at(static_cast<std::size_t>(s))
                                          .at(static_cast<std::size_t>(a));
                    if (static_cast<int>(row.size()) != g.state_count)
                        throw ShapeMismatch("kernel row has wrong length");
                    for (const auto& v : row) g.kernel.push_back(v.get<double>());
                }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed game file: ") + e.what());
    }
    return g;
}

inline void save_game(const RobustMarkovGame& g, const std::string& path) {
    detail::write_file(path, game_to_json(g).dump(2) + "\n");
}

inline RobustMarkovGame load_game(const std::string& path) {
    return game_from_json(detail::parse_text(detail::read_file(path), path));
}

// --- policy <-> json -------------------------------------------------------

inline json policy_to_json(const JointPolicy& pi) {
    json j;
    j["horizon"] = pi.horizon;
    j["state_count"] = pi.state_count;
    j["action_sizes"] = pi.actions.sizes();
    j["kind"] = pi.kind == PolicyKind::Product ? "product" : "correlated";
    json dist = json::array();
    for (int h = 0; h < pi.horizon; ++h) {
        json jh = json::array();
        for (int s = 0; s < pi.state_count; ++s) {
            auto row = pi.row(h, s);
            jh.push_back(json(std::vector<double>(row.begin(), row.end())));
        }
        dist.push_back(std::move(jh));
    }
    j["dist"] = std::move(dist);
    return j;
}

inline JointPolicy policy_from_json(const json& j) {
    JointPolicy pi;
    try {
        pi.horizon = j.at("horizon").get<int>();
        pi.state_count = j.at("state_count").get<int>();
        if (pi.horizon < 1 || pi.state_count < 1)
            throw ShapeMismatch("horizon and state_count must be positive");
        pi.actions = JointActionSpace(j.at("action_sizes").get<std::vector<int>>());
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "product")
            pi.kind = PolicyKind::Product;
        else if (kind == "correlated")
            pi.kind = PolicyKind::Correlated;
        else
            throw ValidationError("policy kind must be 'product' or 'correlated'");
        const long long A = pi.actions.total();
        pi.dist.reserve(static_cast<std::size_t>(pi.horizon) * pi.state_count * A);
        const json& d = j.at("dist");
        for (int h = 0; h < pi.horizon; ++h)
            for (int s = 0; s < pi.state_count; ++s) {
                const json& row = d.at(static_cast<std::size_t>(h)).at(static_cast<std::size_t>(s));
                if (static_cast<long long>(row.size()) != A)
                    throw ShapeMismatch("policy row has wrong length");
                for (const auto& v : row) pi.dist.push_back(v.get<double>());
            }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed policy file: ") + e.what());
    }
    return pi;
}

inline void save_policy(const JointPolicy& pi, const std::string& path) {
    detail::write_file(path, policy_to_json(pi).dump(2) + "\n");
}

inline JointPolicy load_policy(const std::string& path) {
    return policy_from_json(detail::parse_text(detail::read_file(path), path));
}

// --- dataset <-> json ------------------------------------------------------

inline json dataset_to_json(const SampleDataset& d) {
    json j;
    j["horizon"] = d.horizon;
    j["state_count"] = d.state_count;
    j["joint_actions"] = d.joint_actions;
    j["per_cell"] = d.per_cell;
    j["seed"] = d.seed;
    json counts = json::array();
    for (int h = 0; h < d.horizon; ++h) {
        json jh = json::array();
        for (int s = 0; s < d.state_count; ++s) {
            json js = json::array();
            for (long long a = 0; a < d.joint_actions; ++a) {
                auto row = d.row(h, s, a);
                js.push_back(json(std::vector<std::int64_t>(row.begin(), row.end())));
            }
            jh.push_back(std::move(js));
        }
        counts.push_back(std::move(jh));
    }
    j["counts"] = std::move(counts);
    return j;
}

inline SampleDataset dataset_from_json(const json& j) {
    SampleDataset d;
    try {
        d.horizon = j.at("horizon").get<int>();
        d.state_count = j.at("state_count").get<int>();
        d.joint_actions = j.at("joint_actions").get<long long>();
        d.per_cell = j.at("per_cell").get<long long>();
        d.seed = j.at("seed").get<std::uint64_t>();
        if (d.horizon < 1 || d.state_count < 1 || d.joint_actions < 1 || d.per_cell < 1)
            throw ShapeMismatch("dataset dimensions must be positive");
        d.counts.reserve(static_cast<std::size_t>(d.horizon) * d.state_count * d.joint_actions *
                         d.state_count);
        const json& c = j.at("counts");
        for (int h = 0; h < d.horizon; ++h)
            for (int s = 0; s < d.state_count; ++s)
                for (long long a = 0; a < d.joint_actions; ++a) {
                    const json& row = c.at(static_cast<std::size_t>(h))
                                          .at(static_cast<std::size_t>(s))
                                          .at(static_cast<std::size_t>(a));
                    if (static_cast<int>(row.size()) != d.state_count)
                        throw ShapeMismatch("dataset row has wrong length");
                    for (const auto& v : row) d.counts.push_back(v.get<std::int64_t>());
                }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed dataset file: ") + e.what());
    }
    return d;
}

inline void save_dataset(const SampleDataset& d, const std::string& path) {
    detail::write_file(path, dataset_to_json(d).dump() + "\n");
}

inline SampleDataset load_dataset(const std::string& path) {
    return dataset_from_json(detail::parse_text(detail::read_file(path), path));
}

}  // namespace rmg
