#include "ddcl/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ddcl/loss.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/stats.hpp"

namespace ddcl::train {

namespace {

// Substream ids for seed derivation.
constexpr std::uint64_t kTrainStream = 0x7E1;
constexpr std::uint64_t kEvalStream = 0xE7A;
constexpr std::uint64_t kInitStream = 0x171;

constexpr std::uint64_t kEnvSub = 1;
constexpr std::uint64_t kActionSub = 2;
constexpr std::uint64_t kNoiseSub = 3;

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const char* to_string(BitsMode mode) noexcept {
    return mode == BitsMode::Ideal ? "ideal" : "encoded";
}

BitsMode bits_mode_from_string(const std::string& name) {
    if (name == "ideal") return BitsMode::Ideal;
    if (name == "encoded") return BitsMode::Encoded;
    throw std::invalid_argument("bits mode must be 'ideal' or 'encoded'");
}

void TrainConfig::validate() const {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw std::invalid_argument("config: lambda must be >= 0");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("config: delta must be > 0");
    }
    if (episodes == 0) throw std::invalid_argument("config: episodes must be > 0");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (!(gamma > 0.0) || gamma > 1.0) {
        throw std::invalid_argument("config: gamma must be in (0, 1]");
    }
    if (message_dims == 0) throw std::invalid_argument("config: message_dims must be > 0");
    if (batch_episodes == 0) throw std::invalid_argument("config: batch_episodes must be > 0");
    if (hidden_width == 0 || hidden_layers == 0) {
        throw std::invalid_argument("config: hidden sizes must be > 0");
    }
    if (eval_episodes == 0) throw std::invalid_argument("config: eval_episodes must be > 0");
    if (entropy_coef < 0.0) throw std::invalid_argument("config: entropy_coef must be >= 0");
    goals.validate();
}

TrainConfig config_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (j.contains("config")) j = j.at("config");  // accept a run manifest too

    TrainConfig c;
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("episodes")) c.episodes = j.at("episodes").get<std::uint64_t>();
    if (j.contains("lr")) c.lr = j.at("lr").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("message_dims")) c.message_dims = j.at("message_dims").get<std::uint32_t>();
    if (j.contains("bits_mode")) {
        c.bits_mode = bits_mode_from_string(j.at("bits_mode").get<std::string>());
    }
    if (j.contains("batch_episodes")) {
        c.batch_episodes = j.at("batch_episodes").get<std::uint32_t>();
    }
    if (j.contains("entropy_coef")) c.entropy_coef = j.at("entropy_coef").get<double>();
    if (j.contains("hidden_width")) c.hidden_width = j.at("hidden_width").get<std::uint32_t>();
    if (j.contains("hidden_layers")) c.hidden_layers = j.at("hidden_layers").get<std::uint32_t>();
    if (j.contains("eval_episodes")) c.eval_episodes = j.at("eval_episodes").get<std::uint32_t>();
    if (j.contains("message_every_step")) {
        c.message_every_step = j.at("message_every_step").get<bool>();
    }
    if (j.contains("goals")) {
        env::GoalDistribution dist;
        for (const auto& entry : j.at("goals").at("support")) {
            dist.support.push_back({{entry.at("x").get<int>(), entry.at("y").get<int>()},
                                    entry.at("p").get<double>()});
        }
        c.goals = dist;
    }
    c.validate();
    return c;
}

std::string config_to_json(const TrainConfig& config) {
    nlohmann::json j;
    j["lambda"] = config.lambda;
    j["delta"] = config.delta;
    j["episodes"] = config.episodes;
    j["lr"] = config.lr;
    j["seed"] = config.seed;
    j["gamma"] = config.gamma;
    j["message_dims"] = config.message_dims;
    j["bits_mode"] = to_string(config.bits_mode);
    j["batch_episodes"] = config.batch_episodes;
    j["entropy_coef"] = config.entropy_coef;
    j["hidden_width"] = config.hidden_width;
    j["hidden_layers"] = config.hidden_layers;
    j["eval_episodes"] = config.eval_episodes;
    j["message_every_step"] = config.message_every_step;
    nlohmann::json support = nlohmann::json::array();
    for (const auto& [cell, p] : config.goals.support) {
        support.push_back({{"x", cell.x}, {"y", cell.y}, {"p", p}});
    }
    j["goals"] = {{"support", support}};
    return j.dump(2);
}

namespace {

std::vector<std::size_t> net_widths(std::size_t in, const TrainConfig& c,
                                    std::size_t out) {
    std::vector<std::size_t> w;
    w.push_back(in);
    for (std::uint32_t i = 0; i < c.hidden_layers; ++i) w.push_back(c.hidden_width);
    w.push_back(out);
    return w;
}

}  // namespace

Policies make_policies(const TrainConfig& config) {
    config.validate();
    rng::CounterStream init(rng::derive_seed(config.seed, kInitStream, 0));
    Policies p;
    p.speaker = nn::make_net(net_widths(2, config, config.message_dims),
                             nn::Activation::Tanh, nn::Activation::Identity, init);
    p.listener = nn::make_net(net_widths(2 + config.message_dims, config, env::kActionCount),
                              nn::Activation::Tanh, nn::Activation::Identity, init);
    p.value = nn::make_net(net_widths(2 + config.message_dims, config, 1),
                           nn::Activation::Tanh, nn::Activation::Identity, init);
    return p;
}

namespace {

struct RolloutStep {
    nn::GradTape listener_tape;
    nn::GradTape value_tape;
    std::vector<double> probs;
    int action = 0;
    double reward = 0.0;
    double value = 0.0;
};

struct Rollout {
    EpisodeRecord record;
    std::vector<RolloutStep> steps;
    nn::GradTape speaker_tape;
    std::vector<double> z;
    std::uint32_t messages_sent = 0;
};

int sample_categorical(std::span<const double> probs, rng::CounterStream& stream) {
    const double u = stream.next_unit();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

int argmax(std::span<const double> xs) {
    return static_cast<int>(std::max_element(xs.begin(), xs.end()) - xs.begin());
}

// One full episode. `capture` non-null keeps tapes and per-step data for
// the gradient pass; both callers share this single code path.
EpisodeRecord rollout_episode(const Policies& policies, const TrainConfig& config,
                              std::uint64_t episode_seed, ActionMode mode,
                              Rollout* capture) {
    const auto reset = env::reset(config.goals,
                                  rng::derive_seed(episode_seed, kEnvSub, 0));
    rng::CounterStream actions(rng::derive_seed(episode_seed, kActionSub, 0));
    const std::uint64_t noise_seed = rng::derive_seed(episode_seed, kNoiseSub, 0);

    EpisodeRecord record;
    record.goal = reset.state.goal;

    const std::span<const double> speaker_obs(reset.speaker_obs);
    std::vector<double> z = capture
        ? nn::forward(policies.speaker, speaker_obs, &capture->speaker_tape)
        : nn::forward(policies.speaker, speaker_obs);
    if (capture) capture->z = z;

    env::EnvState state = reset.state;
    std::vector<double> z_hat;
    std::vector<double> listener_input(2 + config.message_dims, 0.0);

    for (std::uint32_t t = 0; !state.done; ++t) {
        if (config.message_every_step || t == 0) {
            const rng::NoiseKey key{noise_seed, 0, t, 0};
            auto result = channel::channel_forward(z, key, config.delta);
            z_hat = std::move(result.reconstruction.values);
            record.ideal_bits_total += result.message.ideal_bits;
            record.encoded_bits_total += result.message.encoded_bits;
            record.timesteps.push_back({z, std::move(result.message.ints)});
            if (capture) capture->messages_sent += 1;
        }

        const auto obs = env::listener_obs(state);
        listener_input[0] = obs[0];
        listener_input[1] = obs[1];
        std::copy(z_hat.begin(), z_hat.end(), listener_input.begin() + 2);

        RolloutStep step;
        const auto logits = capture
            ? nn::forward(policies.listener, listener_input, &step.listener_tape)
            : nn::forward(policies.listener, listener_input);
        step.probs = nn::softmax(logits);
        step.action = mode == ActionMode::Sample
            ? sample_categorical(step.probs, actions)
            : argmax(step.probs);
        if (capture) {
            step.value = nn::forward(policies.value, listener_input,
                                     &step.value_tape)[0];
        }

        const auto result = env::step(state, static_cast<env::Action>(step.action));
        step.reward = result.reward;
        record.episode_return += result.reward;
        state = result.state;

        if (capture) capture->steps.push_back(std::move(step));
    }

    record.steps = static_cast<std::uint32_t>(state.t);
    record.success = state.success;
    if (capture) capture->record = record;
    return record;
}

void check_finite(const nn::DenseNet& net, const char* which,
                  std::uint64_t episode) {
    for (const auto& layer : net.layers) {
        for (double w : layer.weights) {
            if (!std::isfinite(w)) {
                throw std::runtime_error(
                    std::string("training diverged: non-finite ") + which +
                    " parameters at episode " + std::to_string(episode));
            }
        }
        for (double b : layer.biases) {
            if (!std::isfinite(b)) {
                throw std::runtime_error(
                    std::string("training diverged: non-finite ") + which +
                    " parameters at episode " + std::to_string(episode));
            }
        }
    }
}

}  // namespace

EpisodeRecord run_episode(const Policies& policies, const TrainConfig& config,
                          std::uint64_t episode_seed, ActionMode mode) {
    config.validate();
    return rollout_episode(policies, config, episode_seed, mode, nullptr);
}

TrainResult train(const TrainConfig& config, const ProgressFn& progress) {
    config.validate();

    TrainResult result;
    result.policies = make_policies(config);
    Policies& pol = result.policies;

    nn::AdamState opt_speaker, opt_listener, opt_value;
    result.metrics.reserve(config.episodes);

    std::vector<Rollout> batch;
    batch.reserve(config.batch_episodes);

    std::uint64_t episode = 0;
    std::uint64_t progress_mark = 0;
    while (episode < config.episodes) {
        const std::uint64_t batch_n =
            std::min<std::uint64_t>(config.batch_episodes, config.episodes - episode);

        batch.clear();
        for (std::uint64_t i = 0; i < batch_n; ++i) {
            Rollout r;
            rollout_episode(pol, config,
                            rng::derive_seed(config.seed, kTrainStream, episode + i),
                            ActionMode::Sample, &r);
            result.metrics.push_back({episode + i, r.record.episode_return,
                                      r.record.success, r.record.ideal_bits_total,
                                      r.record.encoded_bits_total});
            batch.push_back(std::move(r));
        }

        // Discounted returns and raw advantages.
        std::vector<std::vector<double>> returns(batch.size());
        std::vector<double> all_adv;
        for (std::size_t e = 0; e < batch.size(); ++e) {
            const auto& steps = batch[e].steps;
            returns[e].resize(steps.size());
            double g = 0.0;
            for (std::size_t t = steps.size(); t-- > 0;) {
                g = steps[t].reward + config.gamma * g;
                returns[e][t] = g;
                all_adv.push_back(g - steps[t].value);
            }
        }
        double adv_mean = 0.0, adv_sd = 1.0;
        if (!all_adv.empty()) {
            adv_mean = std::accumulate(all_adv.begin(), all_adv.end(), 0.0) /
                       static_cast<double>(all_adv.size());
            double ss = 0.0;
            for (double a : all_adv) ss += (a - adv_mean) * (a - adv_mean);
            adv_sd = std::sqrt(ss / static_cast<double>(all_adv.size())) + 1e-8;
        }

        nn::NetGradients g_speaker = nn::zero_gradients(pol.speaker);
        nn::NetGradients g_listener = nn::zero_gradients(pol.listener);
        nn::NetGradients g_value = nn::zero_gradients(pol.value);

        UpdateStats stats;
        stats.episode = episode;
        std::uint64_t entropy_steps = 0;

        for (std::size_t e = 0; e < batch.size(); ++e) {
            Rollout& r = batch[e];
            std::vector<double> dz(config.message_dims, 0.0);

            for (std::size_t t = 0; t < r.steps.size(); ++t) {
                RolloutStep& step = r.steps[t];
                const double g_t = returns[e][t];
                const double adv = (g_t - step.value - adv_mean) / adv_sd;

                const auto& p = step.probs;
                double entropy = 0.0;
                for (double pi : p) {
                    if (pi > 0.0) entropy -= pi * std::log(pi);
                }
                stats.entropy += entropy;
                ++entropy_steps;
                stats.policy_loss += -adv * std::log(std::max(p[step.action], 1e-300));

                std::vector<double> dlogits(p.size());
                for (std::size_t j = 0; j < p.size(); ++j) {
                    const double onehot = j == static_cast<std::size_t>(step.action) ? 1.0 : 0.0;
                    dlogits[j] = adv * (p[j] - onehot);
                    if (config.entropy_coef > 0.0 && p[j] > 0.0) {
                        dlogits[j] += config.entropy_coef * p[j] * (std::log(p[j]) + entropy);
                    }
                }
                const auto lg = nn::backward(pol.listener, step.listener_tape, dlogits);
                nn::accumulate(g_listener, lg);
                // Policy gradient reaches the speaker through the z_hat
                // slice of the listener input; the channel backward is the
                // identity.
                for (std::uint32_t k = 0; k < config.message_dims; ++k) {
                    dz[k] += lg.input_grad[2 + k];
                }

                const double v_err = step.value - g_t;
                stats.value_loss += 0.5 * v_err * v_err;
                const std::vector<double> dv{v_err};
                nn::accumulate(g_value, nn::backward(pol.value, step.value_tape, dv));
            }

            const double msgs = static_cast<double>(r.messages_sent);
            stats.comms_cost_sum += msgs * loss::comms_cost(r.z, config.delta).total;
            if (config.lambda > 0.0) {
                const auto cg = loss::comms_cost_grad(r.z, config.delta);
                double norm_sq = 0.0;
                for (std::uint32_t k = 0; k < config.message_dims; ++k) {
                    const double contrib = config.lambda * msgs * cg[k];
                    dz[k] += contrib;
                    norm_sq += contrib * contrib;
                }
                stats.comms_grad_norm += std::sqrt(norm_sq);
            }

            nn::accumulate(g_speaker, nn::backward(pol.speaker, r.speaker_tape, dz));
        }

        const double inv_batch = 1.0 / static_cast<double>(batch.size());
        nn::scale(g_speaker, inv_batch);
        nn::scale(g_listener, inv_batch);
        nn::scale(g_value, inv_batch);
        stats.policy_loss *= inv_batch;
        stats.value_loss *= inv_batch;
        stats.comms_cost_sum *= inv_batch;
        stats.comms_grad_norm *= inv_batch;
        stats.entropy = entropy_steps ? stats.entropy / static_cast<double>(entropy_steps) : 0.0;
        stats.total_loss = stats.policy_loss + config.lambda * stats.comms_cost_sum;
        result.updates.push_back(stats);

        auto apply = [&](nn::DenseNet& net, const nn::NetGradients& grads,
                         nn::AdamState& state) {
            auto params = nn::flatten_params(net);
            nn::adam_step(params, nn::flatten_grads(net, grads), state, config.lr);
            nn::unflatten_params(net, params);
        };
        apply(pol.speaker, g_speaker, opt_speaker);
        apply(pol.listener, g_listener, opt_listener);
        apply(pol.value, g_value, opt_value);

        episode += batch_n;
        check_finite(pol.speaker, "speaker", episode);
        check_finite(pol.listener, "listener", episode);
        check_finite(pol.value, "value", episode);

        if (progress && episode >= progress_mark) {
            progress_mark = episode + 2000;
            const std::size_t window = std::min<std::size_t>(result.metrics.size(), 2000);
            double succ = 0.0, bits = 0.0;
            for (std::size_t i = result.metrics.size() - window; i < result.metrics.size(); ++i) {
                succ += result.metrics[i].success ? 1.0 : 0.0;
                bits += config.bits_mode == BitsMode::Ideal
                            ? result.metrics[i].ideal_bits
                            : static_cast<double>(result.metrics[i].encoded_bits);
            }
            progress(episode, succ / static_cast<double>(window),
                     bits / static_cast<double>(window));
        }
    }

    result.eval = evaluate(pol, config, config.eval_episodes);
    return result;
}

EvalSummary evaluate(const Policies& policies, const TrainConfig& config,
                     std::uint64_t episodes, std::uint64_t eval_stream) {
    EvalSummary summary;
    summary.records.reserve(episodes);
    for (std::uint64_t i = 0; i < episodes; ++i) {
        const std::uint64_t seed =
            rng::derive_seed(config.seed, kEvalStream + eval_stream, i);
        auto record = rollout_episode(policies, config, seed, ActionMode::Greedy, nullptr);
        summary.success_rate += record.success ? 1.0 : 0.0;
        summary.mean_ideal_bits += record.ideal_bits_total;
        summary.mean_encoded_bits += static_cast<double>(record.encoded_bits_total);
        summary.records.push_back(std::move(record));
    }
    const double n = static_cast<double>(episodes);
    summary.success_rate /= n;
    summary.mean_ideal_bits /= n;
    summary.mean_encoded_bits /= n;
    return summary;
}

ProtocolAnalysis analyze_protocol(std::span<const EpisodeRecord> records,
                                  const env::GoalDistribution& goals,
                                  BitsMode mode) {
    struct Acc {
        std::uint64_t n = 0;
        std::uint64_t successes = 0;
        double bits = 0.0;
    };
    std::map<std::pair<int, int>, Acc> by_goal;
    for (const auto& r : records) {
        auto& acc = by_goal[{r.goal.x, r.goal.y}];
        acc.n += 1;
        acc.successes += r.success ? 1 : 0;
        acc.bits += r.bits(mode);
    }

    ProtocolAnalysis analysis;
    std::vector<double> freqs, log_freqs, mean_bits;
    for (const auto& [cell, p] : goals.support) {
        const auto it = by_goal.find({cell.x, cell.y});
        if (it == by_goal.end()) continue;
        const Acc& acc = it->second;
        GoalStats gs;
        gs.goal = cell;
        gs.probability = p;
        gs.episodes = acc.n;
        gs.success_rate = static_cast<double>(acc.successes) / static_cast<double>(acc.n);
        gs.mean_bits = acc.bits / static_cast<double>(acc.n);
        analysis.per_goal.push_back(gs);
        freqs.push_back(p);
        log_freqs.push_back(std::log2(p));
        mean_bits.push_back(gs.mean_bits);
    }
    analysis.goals_covered = static_cast<std::uint32_t>(analysis.per_goal.size());
    analysis.partial = analysis.goals_covered < 5;

    if (analysis.goals_covered >= 2) {
        analysis.pearson_freq_bits = stats::pearson(freqs, mean_bits);
        analysis.pearson_log_freq_bits = stats::pearson(log_freqs, mean_bits);
        analysis.degenerate = std::isnan(analysis.pearson_freq_bits);
    } else {
        analysis.pearson_freq_bits = std::numeric_limits<double>::quiet_NaN();
        analysis.pearson_log_freq_bits = std::numeric_limits<double>::quiet_NaN();
        analysis.degenerate = true;
    }
    return analysis;
}

std::vector<RateDistortionPoint> sweep_lambda(std::span<const double> lambdas,
                                              const TrainConfig& base,
                                              const ProgressFn& progress,
                                              const SweepPointFn& on_point) {
    if (lambdas.size() < 2) {
        throw std::invalid_argument("sweep_lambda: need at least 2 lambda values");
    }
    std::vector<RateDistortionPoint> points;
    const double entropy = base.goals.entropy_bits();
    for (double lambda : lambdas) {
        RateDistortionPoint point;
        point.lambda = lambda;
        try {
            TrainConfig config = base;  // shared seed schedule across the sweep
            config.lambda = lambda;
            const TrainResult run = train(config, progress);
            point.mean_bits_per_episode = config.bits_mode == BitsMode::Ideal
                                              ? run.eval.mean_ideal_bits
                                              : run.eval.mean_encoded_bits;
            point.success_rate = run.eval.success_rate;
            point.shannon_gap = point.mean_bits_per_episode - entropy;
            if (on_point) on_point(point, run);
        } catch (const std::exception& e) {
            point.failed = true;
            point.error = e.what();
        }
        points.push_back(std::move(point));
    }
    return points;
}

void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    f << "episode,return,success,ideal_bits,encoded_bits\n";
    for (const auto& r : rows) {
        f << r.episode << ',' << fmt_double(r.episode_return) << ','
          << (r.success ? 1 : 0) << ',' << fmt_double(r.ideal_bits) << ','
          << r.encoded_bits << '\n';
    }
}

void write_eval_records_csv(const std::string& path,
                            std::span<const EpisodeRecord> records) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_eval_records_csv: cannot open " + path);
    f << "episode,goal_x,goal_y,steps,success,return,ideal_bits,encoded_bits\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        f << i << ',' << r.goal.x << ',' << r.goal.y << ',' << r.steps << ','
          << (r.success ? 1 : 0) << ',' << fmt_double(r.episode_return) << ','
          << fmt_double(r.ideal_bits_total) << ',' << r.encoded_bits_total << '\n';
    }
}

std::vector<EpisodeRecord> read_eval_records_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_eval_records_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) {
        throw std::runtime_error("read_eval_records_csv: empty file " + path);
    }
    std::vector<EpisodeRecord> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw std::runtime_error("read_eval_records_csv: malformed row: " + line);
        }
        EpisodeRecord r;
        r.goal.x = std::stoi(fields[1]);
        r.goal.y = std::stoi(fields[2]);
        r.steps = static_cast<std::uint32_t>(std::stoul(fields[3]));
        r.success = fields[4] == "1";
        r.episode_return = std::stod(fields[5]);
        r.ideal_bits_total = std::stod(fields[6]);
        r.encoded_bits_total = std::stoull(fields[7]);
        records.push_back(std::move(r));
    }
    return records;
}

void write_per_goal_csv(const std::string& path, const ProtocolAnalysis& analysis) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_per_goal_csv: cannot open " + path);
    f << "goal_x,goal_y,probability,episodes,success_rate,mean_bits\n";
    for (const auto& g : analysis.per_goal) {
        f << g.goal.x << ',' << g.goal.y << ',' << fmt_double(g.probability) << ','
          << g.episodes << ',' << fmt_double(g.success_rate) << ','
          << fmt_double(g.mean_bits) << '\n';
    }
}

void write_rd_frontier_csv(const std::string& path,
                           std::span<const RateDistortionPoint> points) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_rd_frontier_csv: cannot open " + path);
    f << "lambda,mean_bits_per_episode,success_rate,shannon_gap,failed\n";
    for (const auto& p : points) {
        f << fmt_double(p.lambda) << ',' << fmt_double(p.mean_bits_per_episode)
          << ',' << fmt_double(p.success_rate) << ',' << fmt_double(p.shannon_gap)
          << ',' << (p.failed ? 1 : 0) << '\n';
    }
}

void write_bits_heatmap_csv(const std::string& path,
                            std::span<const EpisodeRecord> records, BitsMode mode) {
    double sums[env::kGridSize][env::kGridSize] = {};
    std::uint64_t counts[env::kGridSize][env::kGridSize] = {};
    for (const auto& r : records) {
        sums[r.goal.y][r.goal.x] += r.bits(mode);
        counts[r.goal.y][r.goal.x] += 1;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_bits_heatmap_csv: cannot open " + path);
    f << "y\\x";
    for (int x = 0; x < env::kGridSize; ++x) f << ',' << x;
    f << '\n';
    for (int y = 0; y < env::kGridSize; ++y) {
        f << y;
        for (int x = 0; x < env::kGridSize; ++x) {
            f << ',';
            if (counts[y][x] > 0) {
                f << fmt_double(sums[y][x] / static_cast<double>(counts[y][x]));
            }
        }
        f << '\n';
    }
}

}  // namespace ddcl::train
