#include "ddcl/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ddcl::nn {

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

DenseNet make_net(std::span<const std::size_t> widths, Activation hidden_act,
                  Activation output_act, rng::CounterStream& init) {
    if (widths.size() < 2) {
        throw std::invalid_argument("make_net: need at least input and output width");
    }
    DenseNet net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.act = (l + 2 == widths.size()) ? output_act : hidden_act;
        const double bound = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
        layer.weights.resize(layer.in * layer.out);
        for (auto& w : layer.weights) w = init.next_range(-bound, bound);
        layer.biases.assign(layer.out, 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

void affine_forward(const DenseLayer& layer, std::span<const double> x,
                    std::vector<double>& out) {
    out.assign(layer.out, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
        const double* wrow = layer.weights.data() + r * layer.in;
        double acc = layer.biases[r];
        for (std::size_t c = 0; c < layer.in; ++c) acc += wrow[c] * x[c];
        out[r] = acc;
    }
    if (layer.act == Activation::Tanh) {
        for (auto& v : out) v = std::tanh(v);
    }
}

}  // namespace

std::vector<double> forward(const DenseNet& net, std::span<const double> x,
                            GradTape* tape) {
    if (x.size() != net.input_width()) {
        throw std::invalid_argument("forward: input width mismatch");
    }
    if (tape) {
        tape->values.clear();
        tape->values.emplace_back(x.begin(), x.end());
        tape->consumed = false;
    }
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (const auto& layer : net.layers) {
        affine_forward(layer, cur, next);
        cur = next;
        if (tape) tape->values.push_back(cur);
    }
    return cur;
}

NetGradients zero_gradients(const DenseNet& net) {
    NetGradients g;
    g.dweights.reserve(net.layers.size());
    g.dbiases.reserve(net.layers.size());
    for (const auto& l : net.layers) {
        g.dweights.emplace_back(l.weights.size(), 0.0);
        g.dbiases.emplace_back(l.biases.size(), 0.0);
    }
    g.input_grad.assign(net.input_width(), 0.0);
    return g;
}

void accumulate(NetGradients& into, const NetGradients& from) {
    for (std::size_t l = 0; l < into.dweights.size(); ++l) {
        for (std::size_t i = 0; i < into.dweights[l].size(); ++i) {
            into.dweights[l][i] += from.dweights[l][i];
        }
        for (std::size_t i = 0; i < into.dbiases[l].size(); ++i) {
            into.dbiases[l][i] += from.dbiases[l][i];
        }
    }
    for (std::size_t i = 0; i < into.input_grad.size(); ++i) {
        into.input_grad[i] += from.input_grad[i];
    }
}

void scale(NetGradients& grads, double factor) {
    for (auto& w : grads.dweights)
        for (auto& v : w) v *= factor;
    for (auto& b : grads.dbiases)
        for (auto& v : b) v *= factor;
    for (auto& v : grads.input_grad) v *= factor;
}

NetGradients backward(const DenseNet& net, GradTape& tape,
                      std::span<const double> output_grad) {
    if (tape.consumed) {
        throw std::logic_error("backward: tape already consumed");
    }
    if (tape.values.size() != net.layers.size() + 1) {
        throw std::invalid_argument("backward: tape does not match network");
    }
    if (output_grad.size() != net.output_width()) {
        throw std::invalid_argument("backward: output grad width mismatch");
    }
    tape.consumed = true;

    NetGradients grads = zero_gradients(net);
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const DenseLayer& layer = net.layers[li];
        const auto& input = tape.values[li];
        const auto& output = tape.values[li + 1];
        // d(activation)/d(preact): tanh' = 1 - y^2 from the cached output.
        if (layer.act == Activation::Tanh) {
            for (std::size_t r = 0; r < layer.out; ++r) {
                delta[r] *= 1.0 - output[r] * output[r];
            }
        }
        auto& dw = grads.dweights[li];
        auto& db = grads.dbiases[li];
        for (std::size_t r = 0; r < layer.out; ++r) {
            db[r] += delta[r];
            double* dwrow = dw.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) {
                dwrow[c] += delta[r] * input[c];
            }
        }
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            const double* wrow = layer.weights.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) {
                prev[c] += wrow[c] * delta[r];
            }
        }
        delta = std::move(prev);
    }
    grads.input_grad = std::move(delta);
    return grads;
}

std::vector<double> flatten_params(const DenseNet& net) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for (const auto& l : net.layers) {
        flat.insert(flat.end(), l.weights.begin(), l.weights.end());
        flat.insert(flat.end(), l.biases.begin(), l.biases.end());
    }
    return flat;
}

void unflatten_params(DenseNet& net, std::span<const double> flat) {
    if (flat.size() != net.parameter_count()) {
        throw std::invalid_argument("unflatten_params: size mismatch");
    }
    std::size_t at = 0;
    for (auto& l : net.layers) {
        std::copy_n(flat.begin() + at, l.weights.size(), l.weights.begin());
        at += l.weights.size();
        std::copy_n(flat.begin() + at, l.biases.size(), l.biases.begin());
        at += l.biases.size();
    }
}

std::vector<double> flatten_grads(const DenseNet& net, const NetGradients& grads) {
    std::vector<double> flat;
    flat.reserve(net.parameter_count());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        flat.insert(flat.end(), grads.dweights[l].begin(), grads.dweights[l].end());
        flat.insert(flat.end(), grads.dbiases[l].begin(), grads.dbiases[l].end());
    }
    return flat;
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
    if (grads.size() != params.size()) {
        throw std::invalid_argument("adam_step: gradient size mismatch");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state size mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs;
    probs.reserve(logits.size());
    double sum = 0.0;
    for (double v : logits) {
        const double e = std::exp(v - peak);
        probs.push_back(e);
        sum += e;
    }
    for (auto& p : probs) p /= sum;
    return probs;
}

namespace {

const char* act_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "identity";
}

Activation act_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw std::invalid_argument("load_checkpoint: unknown activation " + name);
}

std::uint64_t to_le_bits(double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return bits;
}

double from_le_bits(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const DenseNet& net, const std::string& path_prefix) {
    nlohmann::json manifest;
    manifest["dtype"] = "float64le";
    manifest["parameter_count"] = net.parameter_count();
    manifest["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers) {
        manifest["layers"].push_back(
            {{"in", l.in}, {"out", l.out}, {"activation", act_name(l.act)}});
    }
    std::ofstream jf(path_prefix + ".json");
    if (!jf) throw std::runtime_error("save_checkpoint: cannot open " + path_prefix + ".json");
    jf << manifest.dump(2) << "\n";

    std::ofstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("save_checkpoint: cannot open " + path_prefix + ".bin");
    for (double v : flatten_params(net)) {
        const std::uint64_t bits = to_le_bits(v);
        bf.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
}

DenseNet load_checkpoint(const std::string& path_prefix) {
    std::ifstream jf(path_prefix + ".json");
    if (!jf) throw std::runtime_error("load_checkpoint: cannot open " + path_prefix + ".json");
    nlohmann::json manifest = nlohmann::json::parse(jf);

    DenseNet net;
    for (const auto& jl : manifest.at("layers")) {
        DenseLayer l;
        l.in = jl.at("in").get<std::size_t>();
        l.out = jl.at("out").get<std::size_t>();
        l.act = act_from_name(jl.at("activation").get<std::string>());
        l.weights.assign(l.in * l.out, 0.0);
        l.biases.assign(l.out, 0.0);
        net.layers.push_back(std::move(l));
    }

    std::ifstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("load_checkpoint: cannot open " + path_prefix + ".bin");
    std::vector<double> flat(net.parameter_count());
    for (auto& v : flat) {
        std::uint64_t bits = 0;
        bf.read(reinterpret_cast<char*>(&bits), sizeof(bits));
        if (!bf) throw std::runtime_error("load_checkpoint: parameter file truncated");
        v = from_le_bits(bits);
    }
    unflatten_params(net, flat);
    return net;
}

}  // namespace ddcl::nn
