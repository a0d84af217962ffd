#include "ddcl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ddcl::loss {

CommsCost comms_cost(const channel::Signal& z, double delta) {
    channel::detail::validate_delta(delta);
    CommsCost cost;
    cost.per_dim.reserve(z.size());
    for (double v : z) {
        const double c = std::log2(2.0 * std::fabs(v) / delta + 1.0);
        cost.per_dim.push_back(c);
        cost.total += c;
    }
    return cost;
}

std::vector<double> comms_cost_grad(const channel::Signal& z, double delta) {
    channel::detail::validate_delta(delta);
    std::vector<double> grad;
    grad.reserve(z.size());
    for (double v : z) {
        if (v == 0.0) {
            grad.push_back(0.0);
        } else {
            const double g = 2.0 / (std::numbers::ln2 * (2.0 * std::fabs(v) + delta));
            grad.push_back(v > 0.0 ? g : -g);
        }
    }
    return grad;
}

std::vector<double> fake_quantize(std::span<const double> tensor, int bit_width) {
    if (tensor.empty()) {
        throw std::invalid_argument("fake_quantize: empty tensor");
    }
    if (bit_width != 4 && bit_width != 8 && bit_width != 16) {
        throw std::invalid_argument("fake_quantize: bit width must be 4, 8 or 16");
    }
    const double q_min = 0.0;
    const double q_max = static_cast<double>((1u << bit_width) - 1u);

    auto [min_it, max_it] = std::minmax_element(tensor.begin(), tensor.end());
    double min_val = *min_it;
    double max_val = *max_it;
    if (min_val == max_val) {  // widen to keep the scale finite
        min_val -= 0.01;
        max_val += 0.01;
    }

    const double scale = (max_val - min_val) / (q_max - q_min);
    const double zero_point = std::round(q_min - min_val / scale);

    std::vector<double> out;
    out.reserve(tensor.size());
    for (double v : tensor) {
        const double scaled = v / scale + zero_point;
        const double rounded = std::round(scaled);
        const double clamped = std::clamp(rounded, q_min, q_max);
        out.push_back((clamped - zero_point) * scale);
    }
    return out;
}

std::vector<double> fake_quantize_backward(std::span<const double> upstream_grad) {
    return {upstream_grad.begin(), upstream_grad.end()};
}

}  // namespace ddcl::loss
