#pragma once

// Metrics and statistical procedures: Hamming loss, two-sided Wilcoxon
// signed-rank test, Vargha-Delaney A12, Pearson r and 1.5xIQR filtering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tangle/error.hpp"
#include "tangle/taxonomy.hpp"

namespace tangle {

inline double hamming_loss(LabelSet pred, LabelSet truth) noexcept
{
    return static_cast<double>(pred.symmetric_difference(truth).size()) / static_cast<double>(kLabelCount);
}

inline double mean(std::span<const double> v)
{
    if (v.empty())
        return std::nan("");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear interpolation between closest ranks (position (n-1)p on the
// sorted sample), the convention used for quartiles everywhere here.
inline double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        return std::nan("");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline double quantile(std::span<const double> v, double p)
{
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return quantile_sorted(s, p);
}

inline double median(std::span<const double> v) { return quantile(v, 0.5); }

// --- Wilcoxon signed-rank ---------------------------------------------------

enum class TestMethod { exact, normal_approximation };

inline constexpr std::string_view render(TestMethod m) noexcept
{
    return m == TestMethod::exact ? "exact" : "normal-approximation";
}

struct WilcoxonResult {
    double w_plus = 0;     // sum of ranks of positive differences
    double p_value = 1;    // two-sided
    std::size_t n_effective = 0; // after discarding zero differences
    TestMethod method = TestMethod::exact;
};

inline constexpr std::size_t kExactWilcoxonMaxN = 25;

namespace detail {

inline bool nearly_equal(double a, double b) noexcept
{
    return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Average ranks (1-based) of `values`, ties within nearly_equal. Also
// returns the tie-group sizes.
inline std::vector<double> average_ranks(std::span<const double> values, std::vector<std::size_t>* tie_sizes = nullptr)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && nearly_equal(values[order[j]], values[order[i]]))
            ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            ranks[order[k]] = avg;
        if (tie_sizes)
            tie_sizes->push_back(j - i);
        i = j;
    }
    return ranks;
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

} // namespace detail

inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.empty())
        throw ConfigError("wilcoxon: samples must be paired and non-empty");
    std::vector<double> mag;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d == 0.0 || detail::nearly_equal(x[i], y[i]))
            continue;
        mag.push_back(std::fabs(d));
        positive.push_back(d > 0);
    }
    if (mag.empty())
        throw AllDifferencesZero("all " + std::to_string(x.size()) + " paired differences are zero");

    std::vector<std::size_t> ties;
    const auto ranks = detail::average_ranks(mag, &ties);
    WilcoxonResult r;
    r.n_effective = mag.size();
    for (std::size_t i = 0; i < ranks.size(); ++i)
        if (positive[i])
            r.w_plus += ranks[i];

    const auto n = r.n_effective;
    if (n <= kExactWilcoxonMaxN) {
        // Null distribution of W+ over all 2^n sign assignments, on doubled
        // ranks so average ranks stay integral.
        std::size_t total = 0;
        std::vector<std::size_t> doubled(n);
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(ranks[i] * 2));
            total += doubled[i];
        }
        std::vector<double> ways(total + 1, 0.0);
        ways[0] = 1.0;
        std::size_t reach = 0;
        for (auto d : doubled) {
            for (std::size_t s = reach + 1; s-- > 0;)
                if (ways[s] != 0.0)
                    ways[s + d] += ways[s];
            reach += d;
        }
        const double all = std::ldexp(1.0, static_cast<int>(n));
        const auto w2 = static_cast<std::size_t>(std::llround(r.w_plus * 2));
        double lower = 0, upper = 0;
        for (std::size_t s = 0; s <= total; ++s) {
            if (s <= w2)
                lower += ways[s];
            if (s >= w2)
                upper += ways[s];
        }
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
        r.method = TestMethod::exact;
    } else {
        const double nn = static_cast<double>(n);
        const double mu = nn * (nn + 1) / 4.0;
        double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
        for (auto t : ties)
            var -= (std::pow(static_cast<double>(t), 3) - static_cast<double>(t)) / 48.0;
        const double dev = std::max(0.0, std::fabs(r.w_plus - mu) - 0.5);
        r.p_value = var > 0 ? std::min(1.0, 2.0 * detail::normal_sf(dev / std::sqrt(var))) : 1.0;
        r.method = TestMethod::normal_approximation;
    }
    return r;
}

// --- Vargha-Delaney A12 -------------------------------------------------------

// P(X > Y) + 0.5 P(X = Y). Below 0.5 means x tends to be lower.
inline double vargha_delaney_a12(std::span<const double> x, std::span<const double> y)
{
    if (x.empty() || y.empty())
        throw ConfigError("a12: both samples must be non-empty");
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    double wins = 0;
    for (double v : x) {
        const auto lo = std::lower_bound(ys.begin(), ys.end(), v);
        const auto hi = std::upper_bound(lo, ys.end(), v);
        wins += static_cast<double>(lo - ys.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    return wins / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

// Conventional magnitude thresholds on max(A, 1-A): 0.56 / 0.64 / 0.71.
inline std::string_view a12_magnitude(double a12) noexcept
{
    const double m = std::max(a12, 1.0 - a12);
    if (m < 0.56)
        return "negligible";
    if (m < 0.64)
        return "small";
    if (m < 0.71)
        return "medium";
    return "large";
}

// --- Pearson r ----------------------------------------------------------------

inline double pearson_r(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw DegenerateVariance("pearson: need two paired samples of size >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0)
        throw DegenerateVariance("pearson: a sample is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// --- IQR filter -----------------------------------------------------------------

struct IqrFilterResult {
    std::vector<double> kept;    // input order
    std::vector<double> removed; // input order
    double q1 = 0, q3 = 0;
    double lower_fence = 0, upper_fence = 0;
};

inline IqrFilterResult iqr_filter(std::span<const double> samples, double k = 1.5)
{
    IqrFilterResult r;
    if (samples.empty())
        return r;
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    r.q1 = quantile_sorted(s, 0.25);
    r.q3 = quantile_sorted(s, 0.75);
    const double iqr = r.q3 - r.q1;
    r.lower_fence = r.q1 - k * iqr;
    r.upper_fence = r.q3 + k * iqr;
    for (double v : samples)
        (v >= r.lower_fence && v <= r.upper_fence ? r.kept : r.removed).push_back(v);
    return r;
}

// --- paired comparison --------------------------------------------------------

struct ComparisonResult {
    double a12 = 0.5;
    std::optional<double> p_value; // empty when every difference is zero
    std::size_t n_pairs = 0;
    std::optional<TestMethod> method;
};

inline ComparisonResult compare_paired(std::span<const double> x, std::span<const double> y)
{
    ComparisonResult c;
    c.n_pairs = x.size();
    c.a12 = vargha_delaney_a12(x, y);
    try {
        const auto w = wilcoxon_signed_rank(x, y);
        c.p_value = w.p_value;
        c.method = w.method;
    } catch (const AllDifferencesZero&) {
    }
    return c;
}

} // namespace tangle
