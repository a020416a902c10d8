#include "odte/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace odte {
namespace {

// Regularized lower incomplete gamma P(a, x) by its power series; valid and
// fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction;
// valid and fast for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace

double chi_squared_upper_tail(double x, std::size_t dof) {
    if (dof == 0) {
        throw std::invalid_argument("chi_squared_upper_tail: zero degrees of freedom");
    }
    if (!(x > 0.0)) return 1.0;
    const double a = double(dof) / 2.0;
    const double half_x = x / 2.0;
    if (half_x < a + 1.0) {
        return 1.0 - gamma_p_series(a, half_x);
    }
    return gamma_q_continued_fraction(a, half_x);
}

double two_sided_normal_p(double z) {
    // 2·(1 − Φ(|z|)) = erfc(|z| / √2)
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::vector<double> rank_row_descending(std::span<const double> values) {
    const std::size_t k = values.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] > values[b];
    });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j share the same value; assign the average rank.
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t s = i; s <= j; ++s) ranks[order[s]] = avg;
        i = j + 1;
    }
    return ranks;
}

FriedmanResult friedman_test(const Matrix& accuracy) {
    const std::size_t n = accuracy.rows;
    const std::size_t k = accuracy.cols;
    if (n < 2 || k < 2) {
        throw std::invalid_argument("friedman_test: need at least 2 datasets and 2 algorithms");
    }
    FriedmanResult result;
    result.avg_ranks.assign(k, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
        const auto ranks = rank_row_descending(accuracy.row(d));
        for (std::size_t j = 0; j < k; ++j) result.avg_ranks[j] += ranks[j];
    }
    for (auto& r : result.avg_ranks) r /= double(n);

    const double dk = double(k);
    double sum_sq = 0.0;
    for (const double r : result.avg_ranks) sum_sq += r * r;
    result.statistic =
        (12.0 * double(n) / (dk * (dk + 1.0))) * (sum_sq - dk * (dk + 1.0) * (dk + 1.0) / 4.0);
    if (result.statistic < 0.0) result.statistic = 0.0;  // rounding guard at full ties
    result.p_value = chi_squared_upper_tail(result.statistic, k - 1);

    const double denom = double(n) * (dk - 1.0) - result.statistic;
    result.iman_davenport =
        denom > 0.0 ? (double(n) - 1.0) * result.statistic / denom
                    : std::numeric_limits<double>::infinity();
    return result;
}

std::vector<double> holm_adjust(std::span<const double> raw_p_ascending) {
    const std::size_t m = raw_p_ascending.size();
    std::vector<double> adjusted(m);
    double running_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double scaled = std::min(1.0, double(m - i) * raw_p_ascending[i]);
        running_max = std::max(running_max, scaled);
        adjusted[i] = running_max;
    }
    return adjusted;
}

std::vector<HolmEntry> holm_posthoc(std::span<const double> avg_ranks,
                                    std::size_t n_datasets, std::size_t control,
                                    double alpha) {
    const std::size_t k = avg_ranks.size();
    if (k < 2) {
        throw std::invalid_argument("holm_posthoc: need at least 2 algorithms");
    }
    if (control >= k) {
        throw std::invalid_argument("holm_posthoc: control index out of range");
    }
    const double se = std::sqrt(double(k) * (double(k) + 1.0) / (6.0 * double(n_datasets)));

    std::vector<HolmEntry> entries;
    entries.reserve(k - 1);
    for (std::size_t j = 0; j < k; ++j) {
        if (j == control) continue;
        HolmEntry entry;
        entry.algorithm = j;
        entry.z = (avg_ranks[j] - avg_ranks[control]) / se;
        entry.raw_p = two_sided_normal_p(entry.z);
        entries.push_back(entry);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const HolmEntry& a, const HolmEntry& b) { return a.raw_p < b.raw_p; });

    std::vector<double> raw;
    raw.reserve(entries.size());
    for (const auto& entry : entries) raw.push_back(entry.raw_p);
    const auto adjusted = holm_adjust(raw);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].adjusted_p = adjusted[i];
        entries[i].rejected = entries[i].adjusted_p < alpha;
    }
    return entries;
}

std::vector<WtlRow> win_tie_loss(const Matrix& accuracy, std::size_t control) {
    if (control >= accuracy.cols) {
        throw std::invalid_argument("win_tie_loss: control index out of range");
    }
    std::vector<WtlRow> rows;
    for (std::size_t j = 0; j < accuracy.cols; ++j) {
        if (j == control) continue;
        WtlRow row;
        row.algorithm = j;
        for (std::size_t d = 0; d < accuracy.rows; ++d) {
            const double ours = accuracy.at(d, control);
            const double theirs = accuracy.at(d, j);
            if (ours > theirs) {
                ++row.win;
            } else if (ours < theirs) {
                ++row.loss;
            } else {
                ++row.tie;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

ComparisonReport compare_classifiers(std::vector<std::string> algorithms,
                                     std::vector<std::string> datasets,
                                     const Matrix& accuracy, double alpha,
                                     const std::string& control) {
    if (accuracy.cols != algorithms.size() || accuracy.rows != datasets.size()) {
        throw std::invalid_argument("compare_classifiers: shape mismatch");
    }
    ComparisonReport report;
    report.algorithms = std::move(algorithms);
    report.datasets = std::move(datasets);
    report.alpha = alpha;

    // Benchmark tables publish 4 decimals; rounding defines tie semantics for
    // both ranking and win/tie/loss.
    report.accuracy = accuracy;
    for (auto& v : report.accuracy.data) v = round4(v);

    report.friedman = friedman_test(report.accuracy);

    if (control.empty()) {
        report.control_index = std::size_t(
            std::min_element(report.friedman.avg_ranks.begin(), report.friedman.avg_ranks.end()) -
            report.friedman.avg_ranks.begin());
    } else {
        const auto it = std::find(report.algorithms.begin(), report.algorithms.end(), control);
        if (it == report.algorithms.end()) {
            throw std::invalid_argument("compare_classifiers: unknown control '" + control + "'");
        }
        report.control_index = std::size_t(it - report.algorithms.begin());
    }
    report.control = report.algorithms[report.control_index];

    const auto holm = holm_posthoc(report.friedman.avg_ranks, report.accuracy.rows,
                                   report.control_index, alpha);
    const auto wtl = win_tie_loss(report.accuracy, report.control_index);

    for (std::size_t j = 0; j < report.algorithms.size(); ++j) {
        ComparisonRow row;
        row.algorithm = report.algorithms[j];
        row.avg_rank = report.friedman.avg_ranks[j];
        row.is_control = j == report.control_index;
        if (!row.is_control) {
            for (const auto& entry : holm) {
                if (entry.algorithm == j) {
                    row.z = entry.z;
                    row.raw_p = entry.raw_p;
                    row.adjusted_p = entry.adjusted_p;
                    row.rejected = entry.rejected;
                }
            }
            for (const auto& entry : wtl) {
                if (entry.algorithm == j) {
                    row.win = entry.win;
                    row.tie = entry.tie;
                    row.loss = entry.loss;
                }
            }
        }
        report.rows.push_back(std::move(row));
    }
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) {
                         return a.avg_rank < b.avg_rank;
                     });
    return report;
}

}  // namespace odte
