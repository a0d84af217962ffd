// ddcl: verify / train / sweep / analyze / encode / decode / send / recv.
// Exit codes: 0 success, 1 check or run failure, 2 usage error.

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddcl/channel.hpp"
#include "ddcl/codec.hpp"
#include "ddcl/env.hpp"
#include "ddcl/nn.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/stats.hpp"
#include "ddcl/train.hpp"
#include "ddcl/wire.hpp"

#ifndef DDCL_SOURCE_REV
#define DDCL_SOURCE_REV "unknown"
#endif

namespace fs = std::filesystem;
using namespace ddcl;

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t default_seed() {
    if (const char* s = std::getenv("DDCL_SEED")) {
        return std::strtoull(s, nullptr, 10);
    }
    return 1;
}

train::TrainConfig load_config(const std::string& config_path) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config file " + config_path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return train::config_from_json(text);
}

void write_manifest(const fs::path& dir, const train::TrainConfig& config,
                    const std::string& started, const std::string& finished,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(train::config_to_json(config));
    j["source_rev"] = DDCL_SOURCE_REV;
    j["seed"] = config.seed;
    j["started_at"] = started;
    j["finished_at"] = finished;
    j["outputs"] = outputs;
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << "\n";
}

void print_analysis(const train::ProtocolAnalysis& analysis) {
    std::printf("per-goal protocol:\n");
    std::printf("  %-8s %-12s %-10s %-10s %s\n", "goal", "probability", "episodes",
                "success", "mean_bits");
    for (const auto& g : analysis.per_goal) {
        std::printf("  (%d,%d)    %-12g %-10llu %-10.3f %.4f\n", g.goal.x, g.goal.y,
                    g.probability, static_cast<unsigned long long>(g.episodes),
                    g.success_rate, g.mean_bits);
    }
    if (analysis.degenerate) {
        std::printf("correlation undefined (zero variance in per-goal bits)\n");
    } else {
        std::printf("pearson(freq, bits)      = %.4f\n", analysis.pearson_freq_bits);
        std::printf("pearson(log2 freq, bits) = %.4f\n", analysis.pearson_log_freq_bits);
    }
    if (analysis.partial) {
        std::printf("warning: partial result, only %u goals covered\n",
                    analysis.goals_covered);
    }
}

void save_run_outputs(const fs::path& out_dir, const train::TrainConfig& config,
                      const train::TrainResult& result, const std::string& started) {
    fs::create_directories(out_dir);
    train::write_metrics_csv((out_dir / "metrics.csv").string(), result.metrics);
    train::write_eval_records_csv((out_dir / "eval_records.csv").string(),
                                  result.eval.records);
    const auto analysis =
        train::analyze_protocol(result.eval.records, config.goals, config.bits_mode);
    train::write_per_goal_csv((out_dir / "per_goal.csv").string(), analysis);
    train::write_bits_heatmap_csv((out_dir / "bits_heatmap.csv").string(),
                                  result.eval.records, config.bits_mode);
    nn::save_checkpoint(result.policies.speaker, (out_dir / "speaker").string());
    nn::save_checkpoint(result.policies.listener, (out_dir / "listener").string());
    nn::save_checkpoint(result.policies.value, (out_dir / "value").string());
    write_manifest(out_dir, config, started, iso_timestamp(),
                   {"metrics.csv", "eval_records.csv", "per_goal.csv",
                    "bits_heatmap.csv", "speaker.bin", "speaker.json",
                    "listener.bin", "listener.json", "value.bin", "value.json"});

    std::printf("eval over %zu episodes: success=%.4f mean_ideal_bits=%.4f "
                "mean_encoded_bits=%.2f\n",
                result.eval.records.size(), result.eval.success_rate,
                result.eval.mean_ideal_bits, result.eval.mean_encoded_bits);
    print_analysis(analysis);
}

// --- byte-stream transport for the send/recv demo pair ------------------

int connect_to(const std::string& addr) {
    if (addr.rfind("unix:", 0) == 0) {
        const std::string path = addr.substr(5);
        int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw std::runtime_error("socket: " + std::string(strerror(errno)));
        sockaddr_un sa{};
        sa.sun_family = AF_UNIX;
        std::strncpy(sa.sun_path, path.c_str(), sizeof(sa.sun_path) - 1);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
            ::close(fd);
            throw std::runtime_error("connect " + addr + ": " + strerror(errno));
        }
        return fd;
    }
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) {
        throw std::runtime_error("address must be host:port or unix:<path>");
    }
    const std::string host = addr.substr(0, colon);
    const std::string port = addr.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
        throw std::runtime_error("cannot resolve " + addr);
    }
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw std::runtime_error("connect " + addr + " failed");
    return fd;
}

int accept_on(const std::string& addr) {
    int listener = -1;
    if (addr.rfind("unix:", 0) == 0) {
        const std::string path = addr.substr(5);
        ::unlink(path.c_str());
        listener = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (listener < 0) throw std::runtime_error("socket: " + std::string(strerror(errno)));
        sockaddr_un sa{};
        sa.sun_family = AF_UNIX;
        std::strncpy(sa.sun_path, path.c_str(), sizeof(sa.sun_path) - 1);
        if (::bind(listener, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
            ::close(listener);
            throw std::runtime_error("bind " + addr + ": " + strerror(errno));
        }
    } else {
        const auto colon = addr.rfind(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("address must be host:port or unix:<path>");
        }
        const std::string host = addr.substr(0, colon);
        const int port = std::stoi(addr.substr(colon + 1));
        listener = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listener < 0) throw std::runtime_error("socket: " + std::string(strerror(errno)));
        const int one = 1;
        ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
            ::close(listener);
            throw std::runtime_error("listen address must be a literal IPv4 host");
        }
        if (::bind(listener, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
            ::close(listener);
            throw std::runtime_error("bind " + addr + ": " + strerror(errno));
        }
    }
    if (::listen(listener, 1) < 0) {
        ::close(listener);
        throw std::runtime_error("listen: " + std::string(strerror(errno)));
    }
    const int conn = ::accept(listener, nullptr, nullptr);
    ::close(listener);
    if (conn < 0) throw std::runtime_error("accept: " + std::string(strerror(errno)));
    return conn;
}

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        const ssize_t n = ::write(fd, data, len);
        if (n <= 0) throw std::runtime_error("write: " + std::string(strerror(errno)));
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

// Returns false on clean EOF at the first byte.
bool read_exact(int fd, std::uint8_t* data, std::size_t len) {
    std::size_t got = 0;
    while (got < len) {
        const ssize_t n = ::read(fd, data + got, len - got);
        if (n == 0) {
            if (got == 0) return false;
            throw std::runtime_error("read: unexpected EOF mid-frame");
        }
        if (n < 0) throw std::runtime_error("read: " + std::string(strerror(errno)));
        got += static_cast<std::size_t>(n);
    }
    return true;
}

std::string hexfloat_line(std::span<const double> values) {
    std::string line;
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", values[i]);
        if (i) line.push_back(' ');
        line += buf;
    }
    return line;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::int32_t> parse_int_list(const std::string& csv) {
    std::vector<std::int32_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(static_cast<std::int32_t>(std::stol(item)));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DDCL channel, codec and speaker/listener trainer"};
    app.require_subcommand(1);

    // --- verify ---
    auto* verify = app.add_subcommand("verify", "run the statistical verification suite");
    bool verify_full = false;
    std::uint64_t verify_seed = 0x5EED;
    std::string verify_out = "verify_report.json";
    verify->add_flag("--full", verify_full, "full sample sizes (10^6 per test)");
    verify->add_option("--seed", verify_seed, "suite seed");
    verify->add_option("--out", verify_out, "report JSON path");

    // --- shared train options ---
    train::TrainConfig config;
    config.seed = default_seed();
    std::string config_path, out_dir = "run";
    std::string bits_mode_name;
    auto add_train_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config (or run manifest)");
        cmd->add_option("--lambda", config.lambda, "communication cost coefficient");
        cmd->add_option("--delta", config.delta, "quantization width");
        cmd->add_option("--episodes", config.episodes, "training episodes");
        cmd->add_option("--lr", config.lr, "Adam learning rate");
        cmd->add_option("--seed", config.seed, "run seed (default: $DDCL_SEED or 1)");
        cmd->add_option("--gamma", config.gamma, "discount factor");
        cmd->add_option("--dims", config.message_dims, "message dimensions d");
        cmd->add_option("--bits", bits_mode_name, "bit accounting: ideal|encoded");
        cmd->add_option("--batch", config.batch_episodes, "episodes per update");
        cmd->add_option("--entropy", config.entropy_coef, "entropy bonus coefficient");
        cmd->add_option("--hidden", config.hidden_width, "hidden layer width");
        cmd->add_option("--eval-episodes", config.eval_episodes, "eval set size");
        cmd->add_option("--out", out_dir, "output directory");
    };

    auto* train_cmd = app.add_subcommand("train", "train speaker/listener policies");
    add_train_options(train_cmd);
    std::string goals_path;
    train_cmd->add_option("--goals", goals_path, "goal distribution JSON");

    auto* sweep_cmd = app.add_subcommand("sweep", "rate-distortion sweep over lambda");
    add_train_options(sweep_cmd);
    std::string lambdas_csv = "1e-5,5e-4,4e-3,8e-3";
    sweep_cmd->add_option("--lambdas", lambdas_csv, "comma-separated lambda grid");

    auto* analyze_cmd = app.add_subcommand("analyze", "per-goal stats of a run directory");
    std::string analyze_dir;
    std::string analyze_bits = "ideal";
    analyze_cmd->add_option("rundir", analyze_dir, "run output directory")->required();
    analyze_cmd->add_option("--bits", analyze_bits, "bit accounting: ideal|encoded");

    auto* encode_cmd = app.add_subcommand("encode", "encode integers to the prefix code");
    std::string encode_ints;
    encode_cmd->add_option("--ints", encode_ints, "comma-separated integers")->required();

    auto* decode_cmd = app.add_subcommand("decode", "decode a prefix-code bitstring");
    std::string decode_bits;
    decode_cmd->add_option("--bits", decode_bits, "0/1 string, spaces allowed")->required();

    auto* send_cmd = app.add_subcommand("send", "quantize signals and send frames");
    std::uint64_t wire_seed = default_seed();
    std::string wire_addr;
    double wire_delta = 1.0;
    std::string send_input = "-";
    std::uint32_t send_edge = 0;
    send_cmd->add_option("--seed", wire_seed, "shared noise seed");
    send_cmd->add_option("--addr", wire_addr, "host:port or unix:<path>")->required();
    send_cmd->add_option("--delta", wire_delta, "quantization width");
    send_cmd->add_option("--input", send_input, "JSON-lines file of signal vectors ('-' = stdin)");
    send_cmd->add_option("--edge", send_edge, "edge id for noise keys");

    auto* recv_cmd = app.add_subcommand("recv", "receive frames and reconstruct");
    std::string recv_out;
    std::uint64_t recv_count = 0;
    recv_cmd->add_option("--seed", wire_seed, "shared noise seed");
    recv_cmd->add_option("--listen", wire_addr, "host:port or unix:<path>")->required();
    recv_cmd->add_option("--delta", wire_delta, "quantization width");
    recv_cmd->add_option("--count", recv_count, "stop after N frames (default: EOF)");
    recv_cmd->add_option("--out", recv_out, "write reconstructions here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*verify) {
            stats::SuiteOptions options;
            options.seed = verify_seed;
            if (!verify_full) {
                options.n_uniform = 100'000;
                options.n_magnitude = 50'000;
                options.n_jensen = 50'000;
            }
            const auto result = stats::run_full_suite(options);
            for (const auto& report : result.reports) {
                std::printf("%s\n", stats::format_report_line(report).c_str());
            }
            stats::write_report_json(result, verify_out);
            std::printf("%zu tests in %.2fs -> %s (report: %s)\n",
                        result.reports.size(), result.elapsed_seconds,
                        result.all_pass ? "ALL PASS" : "FAILURES", verify_out.c_str());
            return result.all_pass ? 0 : 1;
        }

        if (*train_cmd || *sweep_cmd) {
            CLI::App* cmd = *train_cmd ? static_cast<CLI::App*>(train_cmd)
                                       : static_cast<CLI::App*>(sweep_cmd);
            if (!config_path.empty()) {
                // File values are the base; explicit flags override them.
                const train::TrainConfig file_cfg = load_config(config_path);
                if (!cmd->count("--lambda")) config.lambda = file_cfg.lambda;
                if (!cmd->count("--delta")) config.delta = file_cfg.delta;
                if (!cmd->count("--episodes")) config.episodes = file_cfg.episodes;
                if (!cmd->count("--lr")) config.lr = file_cfg.lr;
                if (!cmd->count("--seed")) config.seed = file_cfg.seed;
                if (!cmd->count("--gamma")) config.gamma = file_cfg.gamma;
                if (!cmd->count("--dims")) config.message_dims = file_cfg.message_dims;
                if (!cmd->count("--bits")) config.bits_mode = file_cfg.bits_mode;
                if (!cmd->count("--batch")) config.batch_episodes = file_cfg.batch_episodes;
                if (!cmd->count("--entropy")) config.entropy_coef = file_cfg.entropy_coef;
                if (!cmd->count("--hidden")) config.hidden_width = file_cfg.hidden_width;
                if (!cmd->count("--eval-episodes")) {
                    config.eval_episodes = file_cfg.eval_episodes;
                }
                config.hidden_layers = file_cfg.hidden_layers;
                config.message_every_step = file_cfg.message_every_step;
                config.goals = file_cfg.goals;
            }
            if (!bits_mode_name.empty()) {
                config.bits_mode = train::bits_mode_from_string(bits_mode_name);
            }
            if (*train_cmd && !goals_path.empty()) {
                config.goals = env::GoalDistribution::from_json_file(goals_path);
            }
            config.validate();
        }

        if (*train_cmd) {
            const std::string started = iso_timestamp();
            const auto progress = [](std::uint64_t ep, double succ, double bits) {
                std::printf("episode %llu: success=%.3f bits/episode=%.2f\n",
                            static_cast<unsigned long long>(ep), succ, bits);
                std::fflush(stdout);
            };
            const auto result = train::train(config, progress);
            save_run_outputs(out_dir, config, result, started);
            return 0;
        }

        if (*sweep_cmd) {
            const std::string started = iso_timestamp();
            const auto lambdas = parse_double_list(lambdas_csv);
            fs::create_directories(out_dir);
            const auto on_point = [&](const train::RateDistortionPoint& point,
                                      const train::TrainResult& run) {
                char sub[64];
                std::snprintf(sub, sizeof(sub), "lambda_%g", point.lambda);
                train::TrainConfig point_config = config;
                point_config.lambda = point.lambda;
                save_run_outputs(fs::path(out_dir) / sub, point_config, run, started);
            };
            const auto points = train::sweep_lambda(lambdas, config, {}, on_point);
            const std::string rd_path = (fs::path(out_dir) / "rd_frontier.csv").string();
            train::write_rd_frontier_csv(rd_path, points);
            std::printf("%-10s %-12s %-10s %s\n", "lambda", "mean_bits", "success",
                        "shannon_gap");
            bool any_failed = false;
            for (const auto& p : points) {
                if (p.failed) {
                    any_failed = true;
                    std::printf("%-10g FAILED: %s\n", p.lambda, p.error.c_str());
                } else {
                    std::printf("%-10g %-12.4f %-10.4f %.4f\n", p.lambda,
                                p.mean_bits_per_episode, p.success_rate, p.shannon_gap);
                }
            }
            std::printf("wrote %s\n", rd_path.c_str());
            return any_failed ? 1 : 0;
        }

        if (*analyze_cmd) {
            const fs::path dir(analyze_dir);
            const auto records =
                train::read_eval_records_csv((dir / "eval_records.csv").string());
            env::GoalDistribution goals = env::default_distribution();
            const fs::path manifest = dir / "manifest.json";
            if (fs::exists(manifest)) {
                std::ifstream f(manifest);
                std::string text((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
                goals = train::config_from_json(text).goals;
            }
            const auto mode = train::bits_mode_from_string(analyze_bits);
            const auto analysis = train::analyze_protocol(records, goals, mode);
            train::write_per_goal_csv((dir / "per_goal.csv").string(), analysis);
            train::write_bits_heatmap_csv((dir / "bits_heatmap.csv").string(), records,
                                          mode);
            print_analysis(analysis);
            return 0;
        }

        if (*encode_cmd) {
            const auto ints = parse_int_list(encode_ints);
            std::string bits;
            double ideal = 0.0;
            std::uint64_t encoded = 0;
            for (std::size_t i = 0; i < ints.size(); ++i) {
                const auto bs = codec::encode_int(ints[i]);
                if (i) bits.push_back(' ');
                bits += bs.to_string();
                ideal += codec::ideal_bit_length(ints[i]);
                encoded += bs.size();
            }
            std::printf("bits: %s\n", bits.c_str());
            std::printf("encoded_bits: %llu\n", static_cast<unsigned long long>(encoded));
            std::printf("ideal_bits: %.6f\n", ideal);
            return 0;
        }

        if (*decode_cmd) {
            const auto bits = codec::BitString::from_string(decode_bits);
            std::string out;
            std::size_t cursor = 0;
            while (cursor < bits.size()) {
                const auto [value, next] = codec::decode_int(bits, cursor);
                if (!out.empty()) out.push_back(',');
                out += std::to_string(value);
                cursor = next;
            }
            std::printf("ints: %s\n", out.c_str());
            return 0;
        }

        if (*send_cmd) {
            std::ifstream file;
            std::istream* in = &std::cin;
            if (send_input != "-") {
                file.open(send_input);
                if (!file) throw std::runtime_error("cannot open " + send_input);
                in = &file;
            }
            const int fd = connect_to(wire_addr);
            std::string line;
            std::uint32_t timestep = 0;
            while (std::getline(*in, line)) {
                if (line.empty()) continue;
                const nlohmann::json j = nlohmann::json::parse(line);
                const channel::Signal z = j.get<std::vector<double>>();
                const rng::NoiseKey key{wire_seed, send_edge, timestep, 0};
                const auto message = channel::quantize(z, key, wire_delta);
                const auto frame = wire::encode_frame(message, send_edge, timestep);
                write_all(fd, frame.data(), frame.size());
                std::printf("frame %u: %zu ints, ideal=%.4f encoded=%llu, %zu bytes\n",
                            timestep, message.ints.size(), message.ideal_bits,
                            static_cast<unsigned long long>(message.encoded_bits),
                            frame.size());
                ++timestep;
            }
            ::close(fd);
            return 0;
        }

        if (*recv_cmd) {
            std::ofstream file;
            std::ostream* out = &std::cout;
            if (!recv_out.empty()) {
                file.open(recv_out);
                if (!file) throw std::runtime_error("cannot open " + recv_out);
                out = &file;
            }
            const int fd = accept_on(wire_addr);
            std::uint64_t frames = 0;
            std::vector<std::uint8_t> buffer;
            while (recv_count == 0 || frames < recv_count) {
                std::uint8_t header[wire::kHeaderBytes];
                if (!read_exact(fd, header, sizeof(header))) break;
                const std::uint32_t payload_bits =
                    (static_cast<std::uint32_t>(header[12]) << 24) |
                    (static_cast<std::uint32_t>(header[13]) << 16) |
                    (static_cast<std::uint32_t>(header[14]) << 8) |
                    static_cast<std::uint32_t>(header[15]);
                const std::size_t payload_bytes = (payload_bits + 7) / 8;
                buffer.assign(header, header + sizeof(header));
                buffer.resize(sizeof(header) + payload_bytes);
                if (payload_bytes > 0 &&
                    !read_exact(fd, buffer.data() + sizeof(header), payload_bytes)) {
                    throw std::runtime_error("recv: EOF mid-frame");
                }
                const auto frame = wire::decode_frame(buffer);
                const rng::NoiseKey key{wire_seed, frame.edge_id, frame.timestep, 0};
                const auto rec = channel::reconstruct(frame.message, key, wire_delta);
                (*out) << hexfloat_line(rec.values) << "\n";
                ++frames;
            }
            ::close(fd);
            out->flush();
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
