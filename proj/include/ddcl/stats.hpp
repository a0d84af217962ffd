#ifndef DDCL_STATS_HPP
#define DDCL_STATS_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ddcl::stats {

/// One executable check of a distributional claim. Margin-based tests
/// leave p_value NaN; chi-square tests leave margin NaN.
struct TestReport {
    std::string name;
    std::string params;
    double statistic = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double margin = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    /// False when the claim's validity regime does not cover the inputs;
    /// such rows are reported, never asserted.
    bool applicable = true;
    std::uint64_t samples = 0;
    std::string note;
};

double chi_square_p_value(double statistic, double dof);

/// Chi-square goodness-of-fit of samples against uniform on [lo, hi),
/// equal-width bins. Pass iff p > alpha.
TestReport chi_square_uniform(const std::string& name,
                              std::span<const double> samples, double lo,
                              double hi, std::size_t bins, double alpha = 0.01);

/// Chi-square homogeneity across binned histograms (contingency test).
TestReport chi_square_homogeneity(const std::string& name,
                                  const std::vector<std::vector<std::uint64_t>>& histograms,
                                  double alpha = 0.01);

/// Reconstruction errors e = z_hat - z over n independent keys.
std::vector<double> error_samples(double z, double delta, std::size_t n,
                                  std::uint64_t seed);

/// Quantized messages m over n independent keys (scalar signal).
std::vector<std::int32_t> message_samples(double z, double delta, std::size_t n,
                                          std::uint64_t seed);

/// e ~ U(-delta/2, delta/2): chi-square over 32 bins, pass iff p > 0.01.
TestReport test_error_uniform(double z, double delta, std::size_t n,
                              std::uint64_t seed);

/// Error distribution indistinguishable across signals: homogeneity over
/// the z grid. Needs >= 3 grid points.
TestReport test_error_independence(std::span<const double> z_grid, double delta,
                                   std::size_t n, std::uint64_t seed);

/// |mean(z_hat) - z| <= 3 * delta / sqrt(12 n).
TestReport test_unbiased_reconstruction(double z, double delta, std::size_t n,
                                        std::uint64_t seed);

/// Magnitude law in the floor-bin convention: bin centers satisfy
/// E[|m + 1/2|] = |z|/delta, and raw magnitudes E[|m|] = |z|/delta -/+ 1/2
/// by sign. Applicable when |z| >= 10 delta; both means must land within
/// 3 standard errors of their targets.
TestReport test_expected_magnitude(double z, double delta, std::size_t n,
                                   std::uint64_t seed);

/// MC E[log2(2|m|+1)] <= log2(2|z|/delta + 1) + 3 stderr. Asserted when
/// |z| >= delta/4; below that the magnitude linearization undershoots and
/// the row is reported with the small-signal caveat instead.
TestReport test_jensen_bound(double z, double delta, std::size_t n,
                             std::uint64_t seed);

struct SuiteOptions {
    std::size_t n_uniform = 1'000'000;
    std::size_t n_magnitude = 100'000;
    std::size_t n_jensen = 100'000;
    std::uint64_t seed = 0x5EED;
};

struct SuiteResult {
    std::vector<TestReport> reports;
    bool all_pass = false;  // over applicable rows
    double elapsed_seconds = 0.0;
};

/// The full verification suite: uniformity and unbiasedness over
/// z in {-3, -1.3, 0, 0.7, 2.5} x delta in {0.1, 1, 15}, independence per
/// delta, magnitude law, and the Jensen chain with its z=0 caveat row.
SuiteResult run_full_suite(const SuiteOptions& options = {});

void write_report_json(const SuiteResult& result, const std::string& path);
std::string format_report_line(const TestReport& report);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace ddcl::stats

#endif
