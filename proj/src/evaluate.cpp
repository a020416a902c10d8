#include "odte/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "odte/random.hpp"

namespace odte {
namespace {

using nlohmann::json;

// Shortest round-trip decimal representation (delegated to the JSON dumper).
std::string format_double(double v) { return json(v).dump(); }

}  // namespace

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument("accuracy: length mismatch");
    }
    if (predicted.empty()) {
        throw std::invalid_argument("accuracy: empty input");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return double(hits) / double(predicted.size());
}

CvReport cross_validate(const Dataset& dataset, const OdteParams& params,
                        const CvParams& cv, std::string dataset_name) {
    if (cv.repetitions < 1) {
        throw std::invalid_argument("cross_validate: repetitions must be at least 1");
    }
    if (cv.folds < 2) {
        throw std::invalid_argument("cross_validate: folds must be at least 2");
    }
    std::vector<std::uint64_t> seeds = cv.base_seeds;
    if (seeds.empty()) {
        seeds.resize(cv.repetitions);
        for (std::size_t r = 0; r < cv.repetitions; ++r) seeds[r] = mix(params.seed, r);
    }
    if (seeds.size() < cv.repetitions) {
        throw std::invalid_argument("cross_validate: not enough base seeds");
    }
    seeds.resize(cv.repetitions);

    const auto start = std::chrono::steady_clock::now();
    CvReport report;
    report.dataset_name = std::move(dataset_name);
    report.seeds_used = seeds;
    double node_sum = 0.0;
    std::size_t fits = 0;

    for (std::size_t r = 0; r < cv.repetitions; ++r) {
        const auto folds = stratified_kfold(dataset, cv.folds, seeds[r]);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            OdteParams fold_params = params;
            fold_params.seed = mix(seeds[r], f + 1);

            Ensemble ensemble;
            if (cv.standardize) {
                const StandardScaler scaler = StandardScaler::fit(folds[f].train);
                ensemble = fit_ensemble(scaler.apply(folds[f].train), fold_params, cv.threads);
                ensemble.scaler = scaler;
            } else {
                ensemble = fit_ensemble(materialize(folds[f].train), fold_params, cv.threads);
            }

            const SampleView& test = folds[f].test;
            std::vector<int> predicted(test.size()), truth(test.size());
            for (std::size_t i = 0; i < test.size(); ++i) {
                predicted[i] = predict_ensemble(ensemble, test.row(i));
                truth[i] = test.label(i);
            }
            const double acc = accuracy(predicted, truth);
            report.folds.push_back(FoldRecord{r, f, seeds[r], acc});
            report.fold_accuracies.push_back(acc);
            node_sum += ensemble_size_stats(ensemble).mean_nodes;
            ++fits;
        }
    }

    const double n = double(report.fold_accuracies.size());
    report.mean = std::accumulate(report.fold_accuracies.begin(),
                                  report.fold_accuracies.end(), 0.0) / n;
    double var = 0.0;
    for (const double a : report.fold_accuracies) {
        var += (a - report.mean) * (a - report.mean);
    }
    report.stddev = std::sqrt(var / n);
    report.mean_tree_nodes = node_sum / double(fits);
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void apply_hyperparameter(OdteParams& params, const std::string& name,
                          const nlohmann::json& value) {
    const auto as_count = [&](const char* what) -> std::size_t {
        if (!value.is_number_unsigned() && !value.is_number_integer()) {
            throw std::invalid_argument(std::string("hyperparameter ") + what +
                                        " expects a non-negative integer");
        }
        const auto v = value.get<long long>();
        if (v < 0) {
            throw std::invalid_argument(std::string("hyperparameter ") + what +
                                        " expects a non-negative integer");
        }
        return std::size_t(v);
    };
    const auto as_real = [&](const char* what) -> double {
        if (!value.is_number()) {
            throw std::invalid_argument(std::string("hyperparameter ") + what +
                                        " expects a number");
        }
        return value.get<double>();
    };
    const auto as_string = [&](const char* what) -> std::string {
        if (!value.is_string()) {
            throw std::invalid_argument(std::string("hyperparameter ") + what +
                                        " expects a string");
        }
        return value.get<std::string>();
    };

    if (name == "C") {
        params.base.svm.C = as_real("C");
        if (!(params.base.svm.C > 0.0)) {
            throw std::invalid_argument("hyperparameter C must be positive");
        }
    } else if (name == "kernel") {
        const std::string kind = as_string("kernel");
        if (kind == "linear") {
            params.base.svm.kernel.kind = KernelKind::linear;
        } else if (kind == "polynomial" || kind == "poly") {
            params.base.svm.kernel.kind = KernelKind::polynomial;
        } else if (kind == "rbf") {
            params.base.svm.kernel.kind = KernelKind::rbf;
        } else {
            throw std::invalid_argument("unknown kernel '" + kind + "'");
        }
    } else if (name == "gamma") {
        params.base.svm.kernel.gamma = as_real("gamma");
        if (!(params.base.svm.kernel.gamma > 0.0)) {
            throw std::invalid_argument("hyperparameter gamma must be positive");
        }
    } else if (name == "degree") {
        params.base.svm.kernel.degree = int(as_count("degree"));
        if (params.base.svm.kernel.degree < 1) {
            throw std::invalid_argument("hyperparameter degree must be at least 1");
        }
    } else if (name == "coef0") {
        params.base.svm.kernel.coef0 = as_real("coef0");
    } else if (name == "max-iter") {
        params.base.svm.max_iter = as_count("max-iter");
        if (params.base.svm.max_iter < 1) {
            throw std::invalid_argument("hyperparameter max-iter must be at least 1");
        }
    } else if (name == "tol") {
        params.base.svm.tol = as_real("tol");
        if (!(params.base.svm.tol > 0.0)) {
            throw std::invalid_argument("hyperparameter tol must be positive");
        }
    } else if (name == "strategy") {
        const std::string strategy = as_string("strategy");
        if (strategy == "ovo") {
            params.base.strategy = MulticlassStrategy::one_vs_one;
        } else if (strategy == "ovr") {
            params.base.strategy = MulticlassStrategy::one_vs_rest;
        } else {
            throw std::invalid_argument("unknown strategy '" + strategy + "'");
        }
    } else if (name == "splitter") {
        const std::string splitter = as_string("splitter");
        if (splitter == "best") {
            params.base.splitter = Splitter::best;
        } else if (splitter == "random") {
            params.base.splitter = Splitter::random;
        } else {
            throw std::invalid_argument("unknown splitter '" + splitter + "'");
        }
    } else if (name == "max-depth") {
        params.base.max_depth = value.is_null() ? kUnlimited : as_count("max-depth");
    } else if (name == "min-samples-split") {
        params.base.min_samples_split = as_count("min-samples-split");
        if (params.base.min_samples_split < 2) {
            throw std::invalid_argument("hyperparameter min-samples-split must be at least 2");
        }
    } else if (name == "n-trees") {
        params.n_trees = as_count("n-trees");
        if (params.n_trees < 1) {
            throw std::invalid_argument("hyperparameter n-trees must be at least 1");
        }
    } else if (name == "max-features") {
        params.max_features = as_count("max-features");
    } else if (name == "bootstrap-size") {
        params.bootstrap_size = as_count("bootstrap-size");
    } else {
        throw std::invalid_argument("unknown hyperparameter '" + name + "'");
    }
}

GridSearchResult grid_search(const Dataset& dataset, const OdteParams& base,
                             const GridSpec& grid, const CvParams& inner) {
    if (grid.entries.empty()) {
        throw std::invalid_argument("grid_search: empty grid");
    }
    for (const auto& [name, values] : grid.entries) {
        if (values.empty()) {
            throw std::invalid_argument("grid_search: empty value list for '" + name + "'");
        }
    }

    // Validate every grid point before doing any work.
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (const auto& [name, values] : grid.entries) {
        shape.push_back(values.size());
        total *= values.size();
    }
    for (std::size_t index = 0; index < total; ++index) {
        OdteParams scratch = base;
        std::size_t rest = index;
        for (std::size_t e = grid.entries.size(); e-- > 0;) {
            const auto& [name, values] = grid.entries[e];
            apply_hyperparameter(scratch, name, values[rest % shape[e]]);
            rest /= shape[e];
        }
    }

    GridSearchResult result;
    double best_mean = -1.0;
    for (std::size_t index = 0; index < total; ++index) {
        OdteParams point_params = base;
        GridPoint point;
        // First grid entry varies slowest (specification order outermost).
        std::size_t rest = index;
        std::vector<std::size_t> digits(grid.entries.size());
        for (std::size_t e = grid.entries.size(); e-- > 0;) {
            digits[e] = rest % shape[e];
            rest /= shape[e];
        }
        for (std::size_t e = 0; e < grid.entries.size(); ++e) {
            const auto& [name, values] = grid.entries[e];
            apply_hyperparameter(point_params, name, values[digits[e]]);
            point.assignment.emplace_back(name, values[digits[e]]);
        }
        const CvReport report = cross_validate(dataset, point_params, inner);
        point.mean = report.mean;
        point.stddev = report.stddev;
        result.table.push_back(std::move(point));
        if (report.mean > best_mean) {
            best_mean = report.mean;
            result.best_index = index;
            result.best_params = point_params;
            result.best_mean = report.mean;
        }
    }
    return result;
}

void write_cv_csv(const CvReport& report, std::ostream& out) {
    out << "dataset,repetition,fold,seed,accuracy\n";
    for (const FoldRecord& record : report.folds) {
        out << report.dataset_name << ',' << record.repetition << ',' << record.fold << ','
            << record.seed << ',' << format_double(record.accuracy) << '\n';
    }
}

json cv_to_json(const CvReport& report, bool include_timing) {
    json payload{{"dataset", report.dataset_name},
                 {"repetitions", report.seeds_used.size()},
                 {"fold_accuracies", report.fold_accuracies},
                 {"mean_accuracy", report.mean},
                 {"std_accuracy", report.stddev},
                 {"seeds", report.seeds_used},
                 {"mean_tree_nodes", report.mean_tree_nodes}};
    if (include_timing) payload["wall_time_seconds"] = report.wall_time_seconds;
    return payload;
}

void write_comparison_csv(const ComparisonReport& report, std::ostream& out) {
    out << "classifier,pvalue,rank,win,tie,loss\n";
    for (const ComparisonRow& row : report.rows) {
        out << row.algorithm << ',';
        if (row.is_control) {
            out << "-," << format_double(row.avg_rank) << ",-,-,-\n";
        } else {
            out << format_double(row.adjusted_p) << ',' << format_double(row.avg_rank) << ','
                << row.win << ',' << row.tie << ',' << row.loss << '\n';
        }
    }
}

json comparison_to_json(const ComparisonReport& report) {
    json rows = json::array();
    for (const ComparisonRow& row : report.rows) {
        json entry{{"classifier", row.algorithm}, {"rank", row.avg_rank}};
        if (row.is_control) {
            entry["control"] = true;
        } else {
            entry["z"] = row.z;
            entry["pvalue_raw"] = row.raw_p;
            entry["pvalue_adjusted"] = row.adjusted_p;
            entry["rejected"] = row.rejected;
            entry["win"] = row.win;
            entry["tie"] = row.tie;
            entry["loss"] = row.loss;
        }
        rows.push_back(std::move(entry));
    }
    return json{{"algorithms", report.algorithms},
                {"datasets", report.datasets.size()},
                {"control", report.control},
                {"alpha", report.alpha},
                {"friedman_statistic", report.friedman.statistic},
                {"friedman_pvalue", report.friedman.p_value},
                {"iman_davenport_statistic", report.friedman.iman_davenport},
                {"rows", rows}};
}

Matrix read_accuracy_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>& algorithms,
                                std::vector<std::string>& datasets) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    std::string line;
    if (!std::getline(file, line)) {
        throw std::runtime_error("empty file: " + path.string());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    algorithms.clear();
    datasets.clear();
    std::stringstream header(line);
    std::string field;
    bool first = true;
    while (std::getline(header, field, ',')) {
        if (first) {
            first = false;
        } else {
            algorithms.push_back(field);
        }
    }
    if (algorithms.empty()) {
        throw std::runtime_error("no algorithm columns in " + path.string());
    }

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != algorithms.size() + 1) {
            throw std::runtime_error("line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(algorithms.size() + 1));
        }
        datasets.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const std::string& text = fields[c];
            double v = 0.0;
            const auto result = std::from_chars(text.data(), text.data() + text.size(), v);
            if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
                throw std::runtime_error("non-numeric cell '" + text + "' at line " +
                                         std::to_string(line_no));
            }
            values.push_back(v);
        }
    }
    if (datasets.empty()) {
        throw std::runtime_error("no data rows in " + path.string());
    }
    Matrix matrix;
    matrix.rows = datasets.size();
    matrix.cols = algorithms.size();
    matrix.data = std::move(values);
    return matrix;
}

}  // namespace odte
