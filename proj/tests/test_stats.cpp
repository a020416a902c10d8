#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "odte/random.hpp"
#include "odte/stats.hpp"

using namespace odte;

namespace {

// Independent chi-square upper-tail oracle built from the closed-form
// recurrence Q_{k+2}(x) = Q_k(x) + (x/2)^{k/2} e^{-x/2} / Gamma(k/2 + 1)
// with Q_1(x) = erfc(sqrt(x/2)) and Q_2(x) = e^{-x/2}.  Shares no code with
// the library's incomplete-gamma implementation.
double chi2_oracle(double x, std::size_t dof) {
    double q = dof % 2 == 1 ? std::erfc(std::sqrt(x / 2.0)) : std::exp(-x / 2.0);
    for (std::size_t k = dof % 2 == 1 ? 1 : 2; k + 2 <= dof; k += 2) {
        const double half = double(k) / 2.0;
        q += std::pow(x / 2.0, half) * std::exp(-x / 2.0) / std::tgamma(half + 1.0);
    }
    return q;
}

Matrix matrix_from(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
}

}  // namespace

TEST_CASE("chi-square upper tail matches the recurrence oracle at tabulated points") {
    // Classic critical values: the 0.05 row for 1..7 and 10 dof, and the 0.01
    // row for 1 and 5 dof.
    const std::vector<std::pair<std::size_t, double>> points{
        {1, 3.841}, {2, 5.991}, {3, 7.815}, {4, 9.488},  {5, 11.070},
        {6, 12.592}, {7, 14.067}, {10, 18.307}, {1, 6.635}, {5, 15.086},
    };
    for (const auto& [dof, x] : points) {
        const double expected = chi2_oracle(x, dof);
        CHECK(std::abs(chi_squared_upper_tail(x, dof) - expected) <= 1e-6);
        // Sanity: these are the 5% / 1% critical values rounded to 3 decimals.
        const double nominal = (x == 6.635 || x == 15.086) ? 0.01 : 0.05;
        CHECK(std::abs(expected - nominal) < 5e-4);
    }
}

TEST_CASE("chi-square upper tail handles edge cases") {
    CHECK(chi_squared_upper_tail(0.0, 3) == 1.0);
    CHECK(chi_squared_upper_tail(-1.0, 3) == 1.0);
    // dof = 2 closes to exp(-x/2)
    CHECK(std::abs(chi_squared_upper_tail(2.0, 2) - std::exp(-1.0)) < 1e-12);
    CHECK(chi_squared_upper_tail(1e4, 3) < 1e-300);
    CHECK_THROWS_AS(chi_squared_upper_tail(1.0, 0), std::invalid_argument);
}

TEST_CASE("chi-square agrees with the oracle across a sweep") {
    for (std::size_t dof = 1; dof <= 12; ++dof) {
        for (double x = 0.25; x < 40.0; x += 0.7) {
            CHECK(std::abs(chi_squared_upper_tail(x, dof) - chi2_oracle(x, dof)) <= 1e-9);
        }
    }
}

TEST_CASE("two-sided normal p matches known constants") {
    CHECK(two_sided_normal_p(0.0) == 1.0);
    CHECK(std::abs(two_sided_normal_p(1.959963985) - 0.05) < 1e-9);
    CHECK(std::abs(two_sided_normal_p(-1.959963985) - 0.05) < 1e-9);
    CHECK(std::abs(two_sided_normal_p(2.0) - 0.0455002638963584) < 1e-12);
}

TEST_CASE("descending ranks average ties and sum to k(k+1)/2") {
    const std::vector<double> values{0.3, 0.5, 0.5, 0.1};
    const auto ranks = rank_row_descending(values);
    CHECK(ranks == std::vector<double>{3.0, 1.5, 1.5, 4.0});
    const auto all_tied = rank_row_descending(std::vector<double>{1.0, 1.0, 1.0});
    CHECK(all_tied == std::vector<double>{2.0, 2.0, 2.0});
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> row(5);
        for (auto& v : row) v = std::floor(rng.unit() * 4.0);  // force some ties
        const auto r = rank_row_descending(row);
        double sum = 0.0;
        for (double v : r) sum += v;
        CHECK(sum == doctest::Approx(15.0).epsilon(1e-12));
    }
}

TEST_CASE("friedman on a strictly ordered 3x3 matrix gives statistic 6") {
    const auto m = matrix_from({{0.9, 0.8, 0.7}, {0.95, 0.85, 0.75}, {0.9, 0.6, 0.3}});
    const auto result = friedman_test(m);
    CHECK(result.avg_ranks == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(result.statistic == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(std::abs(result.p_value - chi2_oracle(6.0, 2)) < 1e-9);
}

TEST_CASE("friedman on identical columns degenerates to statistic 0") {
    const auto m = matrix_from({{0.5, 0.5, 0.5}, {0.7, 0.7, 0.7}});
    const auto result = friedman_test(m);
    CHECK(result.avg_ranks == std::vector<double>{2.0, 2.0, 2.0});
    CHECK(result.statistic == 0.0);
    CHECK(result.p_value == 1.0);
}

TEST_CASE("friedman is equivariant under column permutation") {
    Rng rng(11);
    Matrix m(6, 4);
    for (auto& v : m.data) v = rng.unit();
    const auto base = friedman_test(m);
    // Rotate columns left by one.
    Matrix rotated(6, 4);
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t c = 0; c < 4; ++c) rotated.at(r, c) = m.at(r, (c + 1) % 4);
    }
    const auto rot = friedman_test(rotated);
    CHECK(rot.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(rot.avg_ranks[c] == doctest::Approx(base.avg_ranks[(c + 1) % 4]).epsilon(1e-12));
    }
}

TEST_CASE("friedman validates its input shape") {
    CHECK_THROWS_AS(friedman_test(matrix_from({{0.5, 0.6}})), std::invalid_argument);
    CHECK_THROWS_AS(friedman_test(matrix_from({{0.5}, {0.6}})), std::invalid_argument);
}

TEST_CASE("holm adjustment reproduces the two-hypothesis example") {
    const std::vector<double> raw{0.01, 0.04};
    const auto adjusted = holm_adjust(raw);
    REQUIRE(adjusted.size() == 2);
    CHECK(adjusted[0] == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(adjusted[1] == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("holm adjustment is monotone, capped at one, and order-preserving") {
    const std::vector<double> raw{0.001, 0.02, 0.3, 0.6};
    const auto adjusted = holm_adjust(raw);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(adjusted[i] >= raw[i]);
        CHECK(adjusted[i] <= 1.0);
        if (i > 0) CHECK(adjusted[i] >= adjusted[i - 1]);
    }
    // Single hypothesis: unadjusted.
    CHECK(holm_adjust(std::vector<double>{0.03}) == std::vector<double>{0.03});
}

TEST_CASE("holm posthoc matches a hand-computed two-algorithm case") {
    // k = 2, N = 4: se = sqrt(6/24) = 0.5, rank gap 1 -> z = 2.
    const std::vector<double> ranks{1.0, 2.0};
    const auto entries = holm_posthoc(ranks, 4, 0);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].algorithm == 1);
    CHECK(entries[0].z == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(entries[0].raw_p == doctest::Approx(0.0455002638963584).epsilon(1e-9));
    CHECK(entries[0].adjusted_p == entries[0].raw_p);
    CHECK(entries[0].rejected);
}

TEST_CASE("holm posthoc with equal ranks never rejects") {
    const std::vector<double> ranks{2.0, 2.0, 2.0};
    const auto entries = holm_posthoc(ranks, 10, 0);
    REQUIRE(entries.size() == 2);
    for (const auto& e : entries) {
        CHECK(e.z == 0.0);
        CHECK(e.raw_p == 1.0);
        CHECK(e.adjusted_p == 1.0);
        CHECK_FALSE(e.rejected);
    }
}

TEST_CASE("holm posthoc validates arguments") {
    const std::vector<double> ranks{1.0, 2.0};
    CHECK_THROWS_AS(holm_posthoc(ranks, 4, 7), std::invalid_argument);
    CHECK_THROWS_AS(holm_posthoc(std::vector<double>{1.0}, 4, 0), std::invalid_argument);
}

TEST_CASE("win_tie_loss counts exact comparisons from the control's view") {
    const auto m = matrix_from({{0.9, 0.8, 0.9}, {0.7, 0.8, 0.7}, {0.6, 0.5, 0.6}});
    const auto rows = win_tie_loss(m, 0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].algorithm == 1);
    CHECK(rows[0].win == 2);
    CHECK(rows[0].tie == 0);
    CHECK(rows[0].loss == 1);
    CHECK(rows[1].algorithm == 2);
    CHECK(rows[1].win == 0);
    CHECK(rows[1].tie == 3);
    CHECK(rows[1].loss == 0);
}

TEST_CASE("win_tie_loss totals always equal the dataset count") {
    Rng rng(13);
    Matrix m(7, 4);
    for (auto& v : m.data) v = std::floor(rng.unit() * 3.0) / 10.0;
    for (std::size_t control = 0; control < 4; ++control) {
        for (const auto& row : win_tie_loss(m, control)) {
            CHECK(row.win + row.tie + row.loss == 7);
        }
    }
}

TEST_CASE("a strictly dominant control wins every dataset") {
    const auto m = matrix_from({{0.99, 0.5, 0.4}, {0.98, 0.6, 0.3}});
    const auto rows = win_tie_loss(m, 0);
    for (const auto& row : rows) {
        CHECK(row.win == 2);
        CHECK(row.tie == 0);
        CHECK(row.loss == 0);
    }
}

TEST_CASE("compare_classifiers rounds to four decimals before comparing") {
    // Columns differ only in the fifth decimal: a tie after rounding.
    const auto m = matrix_from({{0.90001, 0.90002}, {0.80001, 0.80000}});
    const auto report = compare_classifiers({"a", "b"}, {"d1", "d2"}, m);
    CHECK(report.friedman.statistic == 0.0);
    for (const auto& row : report.rows) {
        if (!row.is_control) {
            CHECK(row.tie == 2);
            CHECK(row.win == 0);
            CHECK(row.loss == 0);
        }
    }
}

TEST_CASE("compare_classifiers picks the best-ranked control by default") {
    const auto m = matrix_from({{0.6, 0.9, 0.7}, {0.5, 0.8, 0.6}, {0.4, 0.9, 0.5}});
    const auto report = compare_classifiers({"weak", "strong", "middle"}, {"x", "y", "z"}, m);
    CHECK(report.control == "strong");
    CHECK(report.rows.front().algorithm == "strong");
    CHECK(report.rows.front().is_control);
    // Rows are sorted by ascending average rank.
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        CHECK(report.rows[i - 1].avg_rank <= report.rows[i].avg_rank);
    }
}

TEST_CASE("compare_classifiers honors an explicit control and validates names") {
    const auto m = matrix_from({{0.6, 0.9}, {0.5, 0.8}});
    const auto report = compare_classifiers({"a", "b"}, {"x", "y"}, m, 0.05, "a");
    CHECK(report.control == "a");
    CHECK(report.control_index == 0);
    CHECK_THROWS_AS(compare_classifiers({"a", "b"}, {"x", "y"}, m, 0.05, "nope"),
                    std::invalid_argument);
    CHECK_THROWS_AS(compare_classifiers({"a"}, {"x", "y"}, m), std::invalid_argument);
}
