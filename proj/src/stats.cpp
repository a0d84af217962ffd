#include "ddcl/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "ddcl/channel.hpp"
#include "ddcl/loss.hpp"
#include "ddcl/rng.hpp"

namespace ddcl::stats {

namespace {

std::string param_string(double z, double delta, std::size_t n) {
    std::ostringstream os;
    os << "z=" << z << " delta=" << delta << " n=" << n;
    return os.str();
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> xs) {
    MeanSd r;
    if (xs.empty()) return r;
    r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
    return r;
}

std::vector<std::uint64_t> bin_counts(std::span<const double> samples, double lo,
                                      double hi, std::size_t bins) {
    std::vector<std::uint64_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double s : samples) {
        auto idx = static_cast<std::int64_t>(std::floor((s - lo) / width));
        idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(bins) - 1);
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

}  // namespace

double chi_square_p_value(double statistic, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("chi_square_p_value: dof must be > 0");
    const boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

TestReport chi_square_uniform(const std::string& name,
                              std::span<const double> samples, double lo,
                              double hi, std::size_t bins, double alpha) {
    if (bins < 2) throw std::invalid_argument("chi_square_uniform: need >= 2 bins");
    if (samples.size() < 10 * bins) {
        throw std::invalid_argument("chi_square_uniform: too few samples for bin count");
    }
    const auto counts = bin_counts(samples, lo, hi, bins);
    const double expected = static_cast<double>(samples.size()) / static_cast<double>(bins);
    double chi2 = 0.0;
    for (std::uint64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    TestReport report;
    report.name = name;
    report.statistic = chi2;
    report.p_value = chi_square_p_value(chi2, static_cast<double>(bins - 1));
    report.pass = report.p_value > alpha;
    report.samples = samples.size();
    return report;
}

TestReport chi_square_homogeneity(const std::string& name,
                                  const std::vector<std::vector<std::uint64_t>>& histograms,
                                  double alpha) {
    if (histograms.size() < 3) {
        throw std::invalid_argument("chi_square_homogeneity: need >= 3 sample groups");
    }
    const std::size_t bins = histograms.front().size();
    for (const auto& h : histograms) {
        if (h.size() != bins) {
            throw std::invalid_argument("chi_square_homogeneity: ragged histograms");
        }
    }
    std::vector<double> row_totals(histograms.size(), 0.0);
    std::vector<double> col_totals(bins, 0.0);
    double grand = 0.0;
    for (std::size_t r = 0; r < histograms.size(); ++r) {
        for (std::size_t c = 0; c < bins; ++c) {
            row_totals[r] += static_cast<double>(histograms[r][c]);
            col_totals[c] += static_cast<double>(histograms[r][c]);
            grand += static_cast<double>(histograms[r][c]);
        }
    }
    double chi2 = 0.0;
    std::size_t used_cols = 0;
    for (std::size_t c = 0; c < bins; ++c) {
        if (col_totals[c] == 0.0) continue;  // empty column contributes no dof
        ++used_cols;
        for (std::size_t r = 0; r < histograms.size(); ++r) {
            const double expected = row_totals[r] * col_totals[c] / grand;
            const double d = static_cast<double>(histograms[r][c]) - expected;
            chi2 += d * d / expected;
        }
    }
    const double dof =
        static_cast<double>((histograms.size() - 1) * (used_cols > 1 ? used_cols - 1 : 1));
    TestReport report;
    report.name = name;
    report.statistic = chi2;
    report.p_value = chi_square_p_value(chi2, dof);
    report.pass = report.p_value > alpha;
    report.samples = static_cast<std::uint64_t>(grand);
    return report;
}

std::vector<double> error_samples(double z, double delta, std::size_t n,
                                  std::uint64_t seed) {
    std::vector<double> errors;
    errors.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const rng::NoiseKey key{seed, 0, static_cast<std::uint32_t>(i), 0};
        const double eps = rng::noise_at(key, delta);
        const std::int32_t m = channel::detail::quantize_dim(z, eps, delta);
        errors.push_back(channel::detail::reconstruct_dim(m, eps, delta) - z);
    }
    return errors;
}

std::vector<std::int32_t> message_samples(double z, double delta, std::size_t n,
                                          std::uint64_t seed) {
    std::vector<std::int32_t> ms;
    ms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const rng::NoiseKey key{seed, 0, static_cast<std::uint32_t>(i), 0};
        const double eps = rng::noise_at(key, delta);
        ms.push_back(channel::detail::quantize_dim(z, eps, delta));
    }
    return ms;
}

TestReport test_error_uniform(double z, double delta, std::size_t n,
                              std::uint64_t seed) {
    if (n < 10'000) throw std::invalid_argument("test_error_uniform: n >= 10^4 required");
    const auto errors = error_samples(z, delta, n, seed);
    TestReport report = chi_square_uniform("error_uniform", errors, -delta / 2,
                                           delta / 2, 32);
    report.params = param_string(z, delta, n);
    return report;
}

TestReport test_error_independence(std::span<const double> z_grid, double delta,
                                   std::size_t n, std::uint64_t seed) {
    if (z_grid.size() < 3) {
        throw std::invalid_argument("test_error_independence: need >= 3 grid points");
    }
    std::vector<std::vector<std::uint64_t>> histograms;
    histograms.reserve(z_grid.size());
    for (std::size_t gi = 0; gi < z_grid.size(); ++gi) {
        const auto errors =
            error_samples(z_grid[gi], delta, n, rng::derive_seed(seed, 0x1D, gi));
        histograms.push_back(bin_counts(errors, -delta / 2, delta / 2, 32));
    }
    TestReport report = chi_square_homogeneity("error_independence", histograms);
    std::ostringstream os;
    os << "z_grid={";
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        os << (i ? "," : "") << z_grid[i];
    }
    os << "} delta=" << delta << " n=" << n;
    report.params = os.str();
    return report;
}

TestReport test_unbiased_reconstruction(double z, double delta, std::size_t n,
                                        std::uint64_t seed) {
    const auto errors = error_samples(z, delta, n, seed);
    const double mean_error =
        std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
    // sd of U(-delta/2, delta/2) is delta/sqrt(12)
    const double margin = 3.0 * delta / std::sqrt(12.0 * static_cast<double>(n));
    TestReport report;
    report.name = "unbiased_reconstruction";
    report.params = param_string(z, delta, n);
    report.statistic = std::fabs(mean_error);
    report.margin = margin;
    report.pass = report.statistic <= margin;
    report.samples = n;
    return report;
}

TestReport test_expected_magnitude(double z, double delta, std::size_t n,
                                   std::uint64_t seed) {
    TestReport report;
    report.name = "expected_magnitude";
    report.params = param_string(z, delta, n);
    report.samples = n;
    if (std::fabs(z) < 10.0 * delta) {
        report.applicable = false;
        report.pass = true;
        report.note = "outside validity regime |z| >= 10*delta; reported only";
        return report;
    }
    const auto ms = message_samples(z, delta, n, seed);
    std::vector<double> center_mags(n), raw_mags(n);
    for (std::size_t i = 0; i < n; ++i) {
        center_mags[i] = std::fabs(static_cast<double>(ms[i]) + 0.5);
        raw_mags[i] = std::fabs(static_cast<double>(ms[i]));
    }
    const MeanSd center = mean_sd(center_mags);
    const MeanSd raw = mean_sd(raw_mags);
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    // Floor-bin convention: bin centers m+1/2 average to z/delta exactly, so
    // E[|m+1/2|] = |z|/delta; raw |m| sits half a bin inside/outside by sign.
    const double center_target = std::fabs(z) / delta;
    const double raw_target = z > 0 ? center_target - 0.5 : center_target + 0.5;
    const double center_err = std::fabs(center.mean - center_target);
    const double raw_err = std::fabs(raw.mean - raw_target);
    const double center_margin = 3.0 * center.sd / sqrt_n;
    const double raw_margin = 3.0 * raw.sd / sqrt_n;

    report.statistic = center_err;
    report.margin = center_margin;
    report.pass = center_err <= center_margin && raw_err <= raw_margin;
    {
        std::ostringstream os;
        os << "mean|m+1/2|=" << center.mean << " target=" << center_target
           << "; mean|m|=" << raw.mean << " target=" << raw_target;
        report.note = os.str();
    }
    return report;
}

TestReport test_jensen_bound(double z, double delta, std::size_t n,
                             std::uint64_t seed) {
    if (n < 10'000) throw std::invalid_argument("test_jensen_bound: n >= 10^4 required");
    const auto ms = message_samples(z, delta, n, seed);
    std::vector<double> lengths(n);
    for (std::size_t i = 0; i < n; ++i) {
        lengths[i] = std::log2(2.0 * std::fabs(static_cast<double>(ms[i])) + 1.0);
    }
    const MeanSd lhs = mean_sd(lengths);
    const double rhs = loss::comms_cost({z}, delta).total;
    const double stderr_lhs = lhs.sd / std::sqrt(static_cast<double>(n));

    TestReport report;
    report.name = "jensen_bound";
    report.params = param_string(z, delta, n);
    report.samples = n;
    report.statistic = lhs.mean;
    report.margin = rhs + 3.0 * stderr_lhs;
    {
        std::ostringstream os;
        os << "E[log2(2|m|+1)]=" << lhs.mean << " bound=" << rhs
           << " jensen_gap=" << rhs - lhs.mean;
        report.note = os.str();
    }
    if (std::fabs(z) < delta / 4.0) {
        // Small-signal caveat: the linearization E[|m|] = |z|/delta
        // undershoots here and the naive bound can be violated.
        report.applicable = false;
        report.pass = true;
        report.note += "; small-signal regime |z| < delta/4, reported only";
        return report;
    }
    report.pass = lhs.mean <= report.margin;
    return report;
}

SuiteResult run_full_suite(const SuiteOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    SuiteResult result;

    const std::vector<double> z_grid = {-3.0, -1.3, 0.0, 0.7, 2.5};
    const std::vector<double> deltas = {0.1, 1.0, 15.0};

    std::uint64_t salt = 0;
    for (double delta : deltas) {
        for (double z : z_grid) {
            const std::uint64_t seed = rng::derive_seed(options.seed, 0xA1, salt++);
            result.reports.push_back(
                test_error_uniform(z, delta, options.n_uniform, seed));
            result.reports.push_back(
                test_unbiased_reconstruction(z, delta, options.n_uniform, seed));
        }
        result.reports.push_back(test_error_independence(
            z_grid, delta, options.n_uniform,
            rng::derive_seed(options.seed, 0xA2, salt++)));
    }

    struct ZD {
        double z, delta;
    };
    const std::vector<ZD> magnitude_cells = {
        {10.0, 1.0}, {150.0, 15.0}, {-20.0, 1.0}, {25.0, 0.5}, {0.1, 1.0}};
    for (const auto& cell : magnitude_cells) {
        result.reports.push_back(
            test_expected_magnitude(cell.z, cell.delta, options.n_magnitude,
                                    rng::derive_seed(options.seed, 0xA3, salt++)));
    }

    for (double delta : {0.5, 1.0}) {
        for (double z : {0.0, 1.0, 5.0, 7.3, 50.0}) {
            result.reports.push_back(
                test_jensen_bound(z, delta, options.n_jensen,
                                  rng::derive_seed(options.seed, 0xA4, salt++)));
        }
    }

    result.all_pass = true;
    for (const auto& r : result.reports) {
        if (r.applicable && !r.pass) result.all_pass = false;
    }
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_report_json(const SuiteResult& result, const std::string& path) {
    nlohmann::json j;
    j["all_pass"] = result.all_pass;
    j["elapsed_seconds"] = result.elapsed_seconds;
    j["tests"] = nlohmann::json::array();
    for (const auto& r : result.reports) {
        nlohmann::json t;
        t["name"] = r.name;
        t["params"] = r.params;
        t["statistic"] = r.statistic;
        if (!std::isnan(r.p_value)) t["p_value"] = r.p_value;
        if (!std::isnan(r.margin)) t["margin"] = r.margin;
        t["pass"] = r.pass;
        t["applicable"] = r.applicable;
        t["samples"] = r.samples;
        if (!r.note.empty()) t["note"] = r.note;
        j["tests"].push_back(std::move(t));
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_report_json: cannot open " + path);
    f << j.dump(2) << "\n";
}

std::string format_report_line(const TestReport& report) {
    std::ostringstream os;
    if (!report.applicable) {
        os << "[SKIP] ";
    } else {
        os << (report.pass ? "[PASS] " : "[FAIL] ");
    }
    os << report.name << " (" << report.params << ")";
    if (!std::isnan(report.p_value)) os << " p=" << report.p_value;
    if (!std::isnan(report.margin)) {
        os << " stat=" << report.statistic << " margin=" << report.margin;
    }
    if (!report.note.empty()) os << " -- " << report.note;
    return os.str();
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("pearson: need two equal-length series, n >= 2");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> rank(xs.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = shared;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    return pearson(rx, ry);
}

}  // namespace ddcl::stats
