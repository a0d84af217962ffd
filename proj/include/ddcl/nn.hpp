#ifndef DDCL_NN_HPP
#define DDCL_NN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddcl/rng.hpp"

namespace ddcl::nn {

enum class Activation { Identity, Tanh };

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> biases;   // out
    Activation act = Activation::Identity;
};

struct DenseNet {
    std::vector<DenseLayer> layers;

    std::size_t input_width() const { return layers.front().in; }
    std::size_t output_width() const { return layers.back().out; }
    std::size_t parameter_count() const;
};

/// Xavier-uniform init, deterministic given the stream state.
DenseNet make_net(std::span<const std::size_t> widths, Activation hidden_act,
                  Activation output_act, rng::CounterStream& init);

/// Cached activations from one forward pass; consumed exactly once.
struct GradTape {
    std::vector<std::vector<double>> values;  // values[0] = x, values[l+1] = layer l output
    bool consumed = false;
};

std::vector<double> forward(const DenseNet& net, std::span<const double> x,
                            GradTape* tape = nullptr);

struct NetGradients {
    std::vector<std::vector<double>> dweights;
    std::vector<std::vector<double>> dbiases;
    std::vector<double> input_grad;
};

NetGradients zero_gradients(const DenseNet& net);
void accumulate(NetGradients& into, const NetGradients& from);
void scale(NetGradients& grads, double factor);

/// Exact reverse-mode gradients of sum(output * output_grad). Marks the
/// tape consumed; reuse throws.
NetGradients backward(const DenseNet& net, GradTape& tape,
                      std::span<const double> output_grad);

std::vector<double> flatten_params(const DenseNet& net);
void unflatten_params(DenseNet& net, std::span<const double> flat);
std::vector<double> flatten_grads(const DenseNet& net, const NetGradients& grads);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;
};

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

std::vector<double> softmax(std::span<const double> logits);

/// Checkpoints: <prefix>.bin holds the flat parameter vector as
/// little-endian float64, <prefix>.json the layer shape manifest.
void save_checkpoint(const DenseNet& net, const std::string& path_prefix);
DenseNet load_checkpoint(const std::string& path_prefix);

}  // namespace ddcl::nn

#endif
