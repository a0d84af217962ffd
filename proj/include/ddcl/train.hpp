#ifndef DDCL_TRAIN_HPP
#define DDCL_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ddcl/channel.hpp"
#include "ddcl/env.hpp"
#include "ddcl/nn.hpp"

namespace ddcl::train {

enum class BitsMode { Ideal, Encoded };

const char* to_string(BitsMode mode) noexcept;
BitsMode bits_mode_from_string(const std::string& name);

struct TrainConfig {
    double lambda = 4e-3;        // communication cost coefficient
    double delta = 1.0;          // quantization width
    std::uint64_t episodes = 200'000;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    double gamma = 0.99;         // discount
    std::uint32_t message_dims = 2;
    BitsMode bits_mode = BitsMode::Ideal;

    // Trainer internals (the task source gives no values for these).
    std::uint32_t batch_episodes = 32;
    double entropy_coef = 0.01;
    std::uint32_t hidden_width = 64;
    std::uint32_t hidden_layers = 2;
    std::uint32_t eval_episodes = 2000;
    bool message_every_step = true;  // false: one message at t=0, z_hat held

    env::GoalDistribution goals = env::default_distribution();

    void validate() const;
};

TrainConfig config_from_json(const std::string& json_text);
std::string config_to_json(const TrainConfig& config);

struct StepLog {
    std::vector<double> z;
    std::vector<std::int32_t> m;
};

/// The unit of analysis: one rollout with its bit accounting.
struct EpisodeRecord {
    env::Cell goal;
    std::uint32_t steps = 0;
    bool success = false;
    double episode_return = 0.0;
    double ideal_bits_total = 0.0;
    std::uint64_t encoded_bits_total = 0;
    std::vector<StepLog> timesteps;

    double bits(BitsMode mode) const {
        return mode == BitsMode::Ideal ? ideal_bits_total
                                       : static_cast<double>(encoded_bits_total);
    }
};

struct Policies {
    nn::DenseNet speaker;   // goal obs -> z
    nn::DenseNet listener;  // (own obs, z_hat) -> action logits
    nn::DenseNet value;     // (own obs, z_hat) -> baseline
};

Policies make_policies(const TrainConfig& config);

enum class ActionMode { Sample, Greedy };

EpisodeRecord run_episode(const Policies& policies, const TrainConfig& config,
                          std::uint64_t episode_seed,
                          ActionMode mode = ActionMode::Sample);

struct MetricsRow {
    std::uint64_t episode = 0;
    double episode_return = 0.0;
    bool success = false;
    double ideal_bits = 0.0;
    std::uint64_t encoded_bits = 0;
};

/// Per-update loss breakdown. total_loss is policy_loss + lambda *
/// comms_cost_sum by construction; the accounting test recomputes it.
struct UpdateStats {
    std::uint64_t episode = 0;  // first episode of the batch
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double comms_cost_sum = 0.0;
    double entropy = 0.0;
    double total_loss = 0.0;
    double comms_grad_norm = 0.0;
};

struct EvalSummary {
    double success_rate = 0.0;
    double mean_ideal_bits = 0.0;
    double mean_encoded_bits = 0.0;
    std::vector<EpisodeRecord> records;
};

struct TrainResult {
    Policies policies;
    std::vector<MetricsRow> metrics;
    std::vector<UpdateStats> updates;
    EvalSummary eval;
};

using ProgressFn = std::function<void(std::uint64_t episode, double recent_success,
                                      double recent_bits)>;

/// REINFORCE with a learned value baseline; gradients reach the speaker
/// through the channel's identity backward plus the analytic cost
/// gradient. Deterministic given the config.
TrainResult train(const TrainConfig& config, const ProgressFn& progress = {});

EvalSummary evaluate(const Policies& policies, const TrainConfig& config,
                     std::uint64_t episodes, std::uint64_t eval_stream = 1);

struct GoalStats {
    env::Cell goal;
    double probability = 0.0;
    std::uint64_t episodes = 0;
    double success_rate = 0.0;
    double mean_bits = 0.0;
};

struct ProtocolAnalysis {
    std::vector<GoalStats> per_goal;
    /// Pearson correlations of per-goal mean bits against the goal's
    /// ground-truth probability and its log2. NaN when undefined.
    double pearson_freq_bits = 0.0;
    double pearson_log_freq_bits = 0.0;
    std::uint32_t goals_covered = 0;
    bool partial = false;      // fewer than 5 goals covered
    bool degenerate = false;   // zero variance in bits; r undefined
};

ProtocolAnalysis analyze_protocol(std::span<const EpisodeRecord> records,
                                  const env::GoalDistribution& goals,
                                  BitsMode mode);

struct RateDistortionPoint {
    double lambda = 0.0;
    double mean_bits_per_episode = 0.0;
    double success_rate = 0.0;
    double shannon_gap = 0.0;
    bool failed = false;
    std::string error;
};

using SweepPointFn =
    std::function<void(const RateDistortionPoint&, const TrainResult&)>;

/// One independent training run per lambda on a shared seed schedule.
/// Per-point failures are recorded and the sweep continues. `on_point`
/// fires after each successful run with its full result.
std::vector<RateDistortionPoint> sweep_lambda(std::span<const double> lambdas,
                                              const TrainConfig& base,
                                              const ProgressFn& progress = {},
                                              const SweepPointFn& on_point = {});

// CSV/JSON output (schemas documented in the README).
void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows);
void write_eval_records_csv(const std::string& path,
                            std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_eval_records_csv(const std::string& path);
void write_per_goal_csv(const std::string& path, const ProtocolAnalysis& analysis);
void write_rd_frontier_csv(const std::string& path,
                           std::span<const RateDistortionPoint> points);
void write_bits_heatmap_csv(const std::string& path,
                            std::span<const EpisodeRecord> records, BitsMode mode);

}  // namespace ddcl::train

#endif
