#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "odte/dataset.hpp"
#include "odte/ensemble.hpp"
#include "odte/stats.hpp"

namespace odte {

// Fraction of exact matches; lengths must agree and be non-empty.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

struct CvParams {
    std::size_t repetitions = 10;
    std::size_t folds = 5;
    // One seed per repetition; empty derives mix(odte_seed, r).
    std::vector<std::uint64_t> base_seeds;
    bool standardize = false;
    std::size_t threads = 1;
};

struct FoldRecord {
    std::size_t repetition = 0;
    std::size_t fold = 0;
    std::uint64_t seed = 0;  // the repetition seed the fold came from
    double accuracy = 0.0;
};

struct CvReport {
    std::string dataset_name;
    std::vector<FoldRecord> folds;
    std::vector<double> fold_accuracies;  // repetition-major order
    double mean = 0.0;
    double stddev = 0.0;  // population
    std::vector<std::uint64_t> seeds_used;
    double mean_tree_nodes = 0.0;
    double wall_time_seconds = 0.0;
};

// Repeated stratified cross-validation: repetition r folds with
// base_seeds[r]; each fold trains a fresh ensemble (standardizing on the
// training split only when requested) and scores accuracy on the test fold.
CvReport cross_validate(const Dataset& dataset, const OdteParams& params,
                        const CvParams& cv = {}, std::string dataset_name = "");

// Applies one CLI-named hyperparameter ("C", "kernel", "n-trees", ...) to the
// parameter set; throws std::invalid_argument for unknown names or values.
void apply_hyperparameter(OdteParams& params, const std::string& name,
                          const nlohmann::json& value);

struct GridSpec {
    // Iteration order follows specification order; the first entry varies
    // slowest in the Cartesian product.
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> entries;
};

struct GridPoint {
    std::vector<std::pair<std::string, nlohmann::json>> assignment;
    double mean = 0.0;
    double stddev = 0.0;
};

struct GridSearchResult {
    OdteParams best_params;
    std::size_t best_index = 0;
    double best_mean = 0.0;
    std::vector<GridPoint> table;
};

// Exhaustive Cartesian-product search scored by inner cross-validation with
// shared seeds; the best configuration is the highest mean accuracy, ties
// resolved to the earliest point in iteration order.
GridSearchResult grid_search(const Dataset& dataset, const OdteParams& base,
                             const GridSpec& grid, const CvParams& inner);

// Report rendering.  Doubles are printed with shortest round-trip precision.
void write_cv_csv(const CvReport& report, std::ostream& out);
nlohmann::json cv_to_json(const CvReport& report, bool include_timing = true);
void write_comparison_csv(const ComparisonReport& report, std::ostream& out);
nlohmann::json comparison_to_json(const ComparisonReport& report);

// Parses an accuracy-matrix CSV (header: dataset,<algorithm...>; one row per
// dataset).  Throws on missing cells or non-numeric values.
Matrix read_accuracy_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>& algorithms,
                                std::vector<std::string>& datasets);

}  // namespace odte
