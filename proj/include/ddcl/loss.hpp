#ifndef DDCL_LOSS_HPP
#define DDCL_LOSS_HPP

#include <span>
#include <vector>

#include "ddcl/channel.hpp"

namespace ddcl::loss {

/// Differentiable surrogate for the expected message length of one signal:
/// per_dim[k] = log2(2|z_k|/delta + 1).
struct CommsCost {
    double total = 0.0;
    std::vector<double> per_dim;
};

CommsCost comms_cost(const channel::Signal& z, double delta);

/// Analytic gradient of comms_cost: sign(z_k) * 2 / (ln2 * (2|z_k| + delta)),
/// with the subgradient 0 at z_k = 0 so silent channels stay silent.
std::vector<double> comms_cost_grad(const channel::Signal& z, double delta);

/// Fixed-precision straight-through baseline: simulate B-bit affine
/// quantize/dequantize over the whole tensor's min/max range. The backward
/// rule is the identity (fake_quantize_backward).
std::vector<double> fake_quantize(std::span<const double> tensor, int bit_width);
std::vector<double> fake_quantize_backward(std::span<const double> upstream_grad);

}  // namespace ddcl::loss

#endif
