#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "odte/matrix.hpp"

namespace odte {

// Upper-tail probability P(X >= x) for a chi-square variable with `dof`
// degrees of freedom, via the regularized incomplete gamma function
// (series expansion for small arguments, continued fraction otherwise).
double chi_squared_upper_tail(double x, std::size_t dof);

// Standard normal upper-tail two-sided p-value 2·(1 − Φ(|z|)).
double two_sided_normal_p(double z);

// Per-row ranks of a matrix row, rank 1 = highest value, ties averaged.
std::vector<double> rank_row_descending(std::span<const double> values);

struct FriedmanResult {
    std::vector<double> avg_ranks;
    double statistic = 0.0;          // chi-square approximation
    double p_value = 1.0;            // upper tail, k-1 dof
    double iman_davenport = 0.0;     // F refinement statistic (reported only)
};

// Friedman rank test over an N-datasets x k-algorithms accuracy matrix.
// Values are compared exactly; round beforehand if tie semantics require it.
FriedmanResult friedman_test(const Matrix& accuracy);

struct HolmEntry {
    std::size_t algorithm = 0;  // column index in the input matrix
    double z = 0.0;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    bool rejected = false;
};

// Holm step-down adjustment of raw p-values given in ascending order:
// adjusted_i = max over j <= i of min(1, (m - j) * raw_j).
std::vector<double> holm_adjust(std::span<const double> raw_p_ascending);

// Holm step-down post-hoc against a control algorithm, alpha = 0.05 unless
// overridden.  Entries are returned in ascending raw-p order.
std::vector<HolmEntry> holm_posthoc(std::span<const double> avg_ranks,
                                    std::size_t n_datasets, std::size_t control,
                                    double alpha = 0.05);

struct WtlRow {
    std::size_t algorithm = 0;
    std::size_t win = 0;   // control strictly better
    std::size_t tie = 0;   // exactly equal
    std::size_t loss = 0;  // control strictly worse
};

// Win/tie/loss counts from the control column's perspective against every
// other column.  Values are compared exactly.
std::vector<WtlRow> win_tie_loss(const Matrix& accuracy, std::size_t control);

struct ComparisonRow {
    std::string algorithm;
    double avg_rank = 0.0;
    bool is_control = false;
    double z = 0.0;
    double raw_p = 1.0;
    double adjusted_p = 1.0;
    bool rejected = false;
    std::size_t win = 0, tie = 0, loss = 0;
};

struct ComparisonReport {
    std::vector<std::string> algorithms;
    std::vector<std::string> datasets;
    Matrix accuracy;  // after rounding to 4 decimals
    FriedmanResult friedman;
    std::string control;
    std::size_t control_index = 0;
    double alpha = 0.05;
    std::vector<ComparisonRow> rows;  // sorted by ascending avg rank
};

// Full comparison pipeline: inputs are rounded to 4 decimals (matching
// benchmark-table precision, which defines tie semantics), then Friedman ranks
// and the Holm post-hoc against the best-ranked (or named) control.
ComparisonReport compare_classifiers(std::vector<std::string> algorithms,
                                     std::vector<std::string> datasets,
                                     const Matrix& accuracy, double alpha = 0.05,
                                     const std::string& control = "");

}  // namespace odte
