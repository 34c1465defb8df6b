#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "ergo/errors.hpp"

namespace ergo {

struct moment_summary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // sample variance, n-1 denominator
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double sd() const { return std::sqrt(variance); }
    double std_error() const { return sd() / std::sqrt(double(count)); }
};

// Two-pass central moments. Plain moment estimators for skew and kurtosis;
// the callers compare against thresholds far wider than estimator bias.
inline moment_summary moments(std::span<const double> xs) {
    moment_summary m;
    m.count = xs.size();
    if (xs.size() < 2) throw validation_error("moments: need at least 2 samples");
    const double n = double(xs.size());
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {  // Kahan, the simulators hand us 1e6+ values
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.variance = m2 * n / (n - 1.0);
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

inline double mean(std::span<const double> xs) { return moments(xs).mean; }

inline double median(std::span<const double> xs) {
    if (xs.empty()) throw validation_error("median: empty sample");
    std::vector<double> copy(xs.begin(), xs.end());
    const std::size_t mid = copy.size() / 2;
    std::nth_element(copy.begin(), copy.begin() + mid, copy.end());
    double upper = copy[mid];
    if (copy.size() % 2 == 1) return upper;
    std::nth_element(copy.begin(), copy.begin() + mid - 1, copy.begin() + mid);
    return 0.5 * (copy[mid - 1] + upper);
}

struct interval_estimate {
    double lower, upper;
};

// Wilson score interval for a binomial proportion. z defaults to the
// two-sided 95% point.
inline interval_estimate wilson_interval(std::size_t successes, std::size_t trials,
                                         double z = 1.959963984540054) {
    if (trials == 0) throw validation_error("wilson_interval: zero trials");
    const double n = double(trials);
    const double p = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double spread =
        z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {center - spread, center + spread};
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
// Samples must be sorted ascending.
inline double ks_statistic(std::span<const double> sorted,
                           const std::function<double(double)>& cdf) {
    if (sorted.empty()) throw validation_error("ks_statistic: empty sample");
    const double n = double(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        worst = std::max(worst, std::max(F - double(i) / n, double(i + 1) / n - F));
    }
    return worst;
}

// Spearman rank correlation. Ties get their midrank.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw validation_error("spearman: need two equal-length samples");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double midrank = 0.5 * double(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = midrank;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(xs), ry = ranks(ys);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= double(rx.size());
    my /= double(ry.size());
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0)
        throw validation_error("spearman: constant sample has no rank order");
    return num / std::sqrt(dx * dy);
}

}  // namespace ergo
