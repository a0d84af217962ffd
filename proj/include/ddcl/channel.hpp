#ifndef DDCL_CHANNEL_HPP
#define DDCL_CHANNEL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ddcl/rng.hpp"

namespace ddcl::channel {

/// The sender's pre-channel latent z, one double per dimension.
using Signal = std::vector<double>;

/// What actually crosses the channel: signed integers plus both bit
/// accountings (fractional log2(2|m|+1) and the real prefix-code length).
struct DiscreteMessage {
    std::vector<std::int32_t> ints;
    double ideal_bits = 0.0;
    std::uint64_t encoded_bits = 0;
};

/// Receiver-side reconstruction z_hat. `error` (z_hat - z) is filled only
/// when the caller supplies z; a deployed receiver never sees it.
struct Reconstruction {
    std::vector<double> values;
    std::vector<double> error;
};

struct ChannelResult {
    DiscreteMessage message;
    Reconstruction reconstruction;
};

/// Per-dimension noise key: dim index is added to the base key's dim.
inline rng::NoiseKey key_for_dim(rng::NoiseKey base, std::size_t k) noexcept {
    base.dim += static_cast<std::uint32_t>(k);
    return base;
}

/// Sender side: perturb each dim with eps_k ~ U(-delta/2, delta/2) derived
/// from the key, then take m_k = floor((z_k + eps_k) / delta).
DiscreteMessage quantize(const Signal& z, const rng::NoiseKey& key_base,
                         double delta);

/// Receiver side: z_hat_k = (m_k + 1/2) * delta - eps_k with eps_k
/// re-derived from the shared key, never transmitted. Supplying the
/// original signal populates the error vector.
Reconstruction reconstruct(const DiscreteMessage& m,
                           const rng::NoiseKey& key_base, double delta,
                           std::span<const double> original_z = {});

/// Both halves with one noise derivation. The identity z_hat = z + e with
/// e ~ U(-delta/2, delta/2) independent of z is what makes the channel a
/// plain additive-noise node for the backward pass.
ChannelResult channel_forward(const Signal& z, const rng::NoiseKey& key_base,
                              double delta);

/// The channel's backward rule: d(z_hat)/dz = 1, so gradients pass through
/// unchanged.
std::vector<double> grad_passthrough(std::span<const double> upstream_grad);

namespace detail {

/// Test hooks: identical arithmetic with caller-supplied noise, bypassing
/// the rng so hand-computed cases can be pinned exactly.
std::int32_t quantize_dim(double z, double eps, double delta);
double reconstruct_dim(std::int32_t m, double eps, double delta);
DiscreteMessage quantize_with_noise(const Signal& z,
                                    std::span<const double> eps, double delta);
Reconstruction reconstruct_with_noise(const DiscreteMessage& m,
                                      std::span<const double> eps, double delta,
                                      std::span<const double> original_z = {});

void validate_delta(double delta);

}  // namespace detail

}  // namespace ddcl::channel

#endif
