#include "ddcl/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "ddcl/codec.hpp"

namespace ddcl::channel {

namespace detail {

void validate_delta(double delta) {
    if (!std::isfinite(delta) || !(delta > 0.0)) {
        throw std::invalid_argument("channel: delta must be finite and > 0");
    }
}

std::int32_t quantize_dim(double z, double eps, double delta) {
    if (!std::isfinite(z)) {
        throw std::invalid_argument("quantize: signal component is not finite");
    }
    const double binned = std::floor((z + eps) / delta);
    // Hard error instead of saturation: a clamped m would silently break
    // the z_hat = z + e identity.
    if (!(binned >= -2147483647.0 && binned <= 2147483647.0)) {
        throw std::overflow_error(
            "quantize: signal magnitude out of supported range (|m| > 2^31-1)");
    }
    return static_cast<std::int32_t>(binned);
}

double reconstruct_dim(std::int32_t m, double eps, double delta) {
    return (static_cast<double>(m) + 0.5) * delta - eps;
}

DiscreteMessage quantize_with_noise(const Signal& z,
                                    std::span<const double> eps, double delta) {
    validate_delta(delta);
    if (eps.size() != z.size()) {
        throw std::invalid_argument("quantize: noise/signal dimension mismatch");
    }
    DiscreteMessage msg;
    msg.ints.reserve(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
        msg.ints.push_back(quantize_dim(z[k], eps[k], delta));
    }
    msg.ideal_bits = codec::ideal_bits_total(msg.ints);
    msg.encoded_bits = 0;
    for (std::int32_t m : msg.ints) msg.encoded_bits += codec::encoded_bit_length(m);
    return msg;
}

Reconstruction reconstruct_with_noise(const DiscreteMessage& m,
                                      std::span<const double> eps, double delta,
                                      std::span<const double> original_z) {
    validate_delta(delta);
    if (eps.size() != m.ints.size()) {
        throw std::invalid_argument("reconstruct: noise/message dimension mismatch");
    }
    if (!original_z.empty() && original_z.size() != m.ints.size()) {
        throw std::invalid_argument("reconstruct: original signal dimension mismatch");
    }
    Reconstruction rec;
    rec.values.reserve(m.ints.size());
    for (std::size_t k = 0; k < m.ints.size(); ++k) {
        rec.values.push_back(reconstruct_dim(m.ints[k], eps[k], delta));
    }
    if (!original_z.empty()) {
        rec.error.reserve(m.ints.size());
        for (std::size_t k = 0; k < m.ints.size(); ++k) {
            rec.error.push_back(rec.values[k] - original_z[k]);
        }
    }
    return rec;
}

namespace {

std::vector<double> derive_noise(const rng::NoiseKey& key_base, std::size_t dims,
                                 double delta) {
    std::vector<double> eps;
    eps.reserve(dims);
    for (std::size_t k = 0; k < dims; ++k) {
        eps.push_back(rng::noise_at(key_for_dim(key_base, k), delta));
    }
    return eps;
}

}  // namespace

}  // namespace detail

DiscreteMessage quantize(const Signal& z, const rng::NoiseKey& key_base,
                         double delta) {
    detail::validate_delta(delta);
    const auto eps = detail::derive_noise(key_base, z.size(), delta);
    return detail::quantize_with_noise(z, eps, delta);
}

Reconstruction reconstruct(const DiscreteMessage& m,
                           const rng::NoiseKey& key_base, double delta,
                           std::span<const double> original_z) {
    detail::validate_delta(delta);
    const auto eps = detail::derive_noise(key_base, m.ints.size(), delta);
    return detail::reconstruct_with_noise(m, eps, delta, original_z);
}

ChannelResult channel_forward(const Signal& z, const rng::NoiseKey& key_base,
                              double delta) {
    detail::validate_delta(delta);
    const auto eps = detail::derive_noise(key_base, z.size(), delta);
    ChannelResult result;
    result.message = detail::quantize_with_noise(z, eps, delta);
    result.reconstruction = detail::reconstruct_with_noise(
        result.message, eps, delta, std::span<const double>{z});
    return result;
}

std::vector<double> grad_passthrough(std::span<const double> upstream_grad) {
    return {upstream_grad.begin(), upstream_grad.end()};
}

}  // namespace ddcl::channel
