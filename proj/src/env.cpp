#include "ddcl/env.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ddcl/rng.hpp"

namespace ddcl::env {

double GoalDistribution::entropy_bits() const {
    double h = 0.0;
    for (const auto& [cell, p] : support) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

void GoalDistribution::validate() const {
    if (support.empty()) {
        throw std::invalid_argument("GoalDistribution: empty support");
    }
    double sum = 0.0;
    for (const auto& [cell, p] : support) {
        if (cell.x < 0 || cell.x >= kGridSize || cell.y < 0 || cell.y >= kGridSize) {
            throw std::invalid_argument("GoalDistribution: cell outside grid");
        }
        if (!(p > 0.0) || p > 1.0) {
            throw std::invalid_argument("GoalDistribution: probability outside (0, 1]");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("GoalDistribution: probabilities do not sum to 1");
    }
}

GoalDistribution GoalDistribution::from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("GoalDistribution: cannot open " + path);
    const nlohmann::json j = nlohmann::json::parse(f);
    GoalDistribution dist;
    for (const auto& entry : j.at("support")) {
        Cell cell{entry.at("x").get<int>(), entry.at("y").get<int>()};
        dist.support.emplace_back(cell, entry.at("p").get<double>());
    }
    dist.validate();
    return dist;
}

GoalDistribution default_distribution() {
    GoalDistribution dist;
    dist.support = {
        {{0, 0}, 0.515}, {{7, 7}, 0.258}, {{3, 4}, 0.129},
        {{4, 3}, 0.064}, {{1, 6}, 0.031}, {{6, 1}, 0.003},
    };
    return dist;
}

namespace {

std::array<double, 2> normalized(const Cell& c) {
    return {static_cast<double>(c.x) / (kGridSize - 1),
            static_cast<double>(c.y) / (kGridSize - 1)};
}

}  // namespace

ResetResult reset(const GoalDistribution& dist, std::uint64_t seed) {
    dist.validate();
    rng::CounterStream stream(seed);

    const double u = stream.next_unit();
    Cell goal = dist.support.back().first;
    double cum = 0.0;
    for (const auto& [cell, p] : dist.support) {
        cum += p;
        if (u < cum) {
            goal = cell;
            break;
        }
    }

    // Uniform over the 63 non-goal cells: draw from [0, 63) and skip the
    // goal's linear index.
    const int goal_index = goal.y * kGridSize + goal.x;
    int idx = static_cast<int>(stream.next_below(kGridSize * kGridSize - 1));
    if (idx >= goal_index) ++idx;
    const Cell listener{idx % kGridSize, idx / kGridSize};

    ResetResult r;
    r.state = EnvState{goal, listener, 0, false, false};
    r.speaker_obs = normalized(goal);
    r.listener_obs = normalized(listener);
    return r;
}

std::array<double, 2> listener_obs(const EnvState& state) {
    return normalized(state.listener);
}

StepResult step(const EnvState& state, Action action) {
    if (state.done) {
        throw std::logic_error("env::step: episode already finished");
    }
    EnvState next = state;
    switch (action) {
        case Action::Up: next.listener.y = std::min(next.listener.y + 1, kGridSize - 1); break;
        case Action::Down: next.listener.y = std::max(next.listener.y - 1, 0); break;
        case Action::Left: next.listener.x = std::max(next.listener.x - 1, 0); break;
        case Action::Right: next.listener.x = std::min(next.listener.x + 1, kGridSize - 1); break;
        case Action::Stay: break;
        default: throw std::invalid_argument("env::step: unknown action");
    }
    next.t = state.t + 1;

    StepResult result;
    if (next.listener == next.goal) {
        next.done = true;
        next.success = true;
        result.reward = kSuccessReward;
    } else {
        result.reward = kStepPenalty;
        if (next.t >= kMaxSteps) {
            next.done = true;
            next.success = false;
        }
    }
    result.done = next.done;
    result.state = next;
    return result;
}

Action oracle_action(const Cell& listener, const Cell& goal) {
    if (listener.x < goal.x) return Action::Right;
    if (listener.x > goal.x) return Action::Left;
    if (listener.y < goal.y) return Action::Up;
    if (listener.y > goal.y) return Action::Down;
    return Action::Stay;
}

}  // namespace ddcl::env
