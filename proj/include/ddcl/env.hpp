#ifndef DDCL_ENV_HPP
#define DDCL_ENV_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ddcl::env {

// 8x8 speaker/listener grid world. The speaker knows the goal, the
// listener only its own position; everything else must cross the channel.
inline constexpr int kGridSize = 8;
inline constexpr int kMaxSteps = 32;
inline constexpr double kStepPenalty = -0.01;
inline constexpr double kSuccessReward = 1.0;

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
inline constexpr int kActionCount = 5;

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct GoalDistribution {
    std::vector<std::pair<Cell, double>> support;

    double entropy_bits() const;
    /// Probabilities must be positive and sum to 1 within 1e-12.
    void validate() const;
    static GoalDistribution from_json_file(const std::string& path);
};

/// The six-point non-uniform goal distribution, entropy ~1.81 bits.
GoalDistribution default_distribution();

struct EnvState {
    Cell goal;
    Cell listener;
    int t = 0;
    bool done = false;
    bool success = false;
};

struct ResetResult {
    EnvState state;
    std::array<double, 2> speaker_obs;   // goal coords / 7
    std::array<double, 2> listener_obs;  // listener coords / 7
};

/// Goal drawn from the distribution, listener placed uniformly over the
/// 63 non-goal cells. Deterministic given the seed.
ResetResult reset(const GoalDistribution& dist, std::uint64_t seed);

std::array<double, 2> listener_obs(const EnvState& state);

struct StepResult {
    EnvState state;
    double reward = 0.0;
    bool done = false;
};

/// Moves are clipped at grid edges. Reaching the goal ends the episode
/// with +1; every other step costs -0.01; 32 steps without the goal is a
/// failure. Throws if called on a finished episode.
StepResult step(const EnvState& state, Action action);

/// Greedy Manhattan walk toward the goal; reaches any cell in <= 14 steps.
Action oracle_action(const Cell& listener, const Cell& goal);

}  // namespace ddcl::env

#endif
