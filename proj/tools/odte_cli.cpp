// odte: fit/predict/cv/tune/compare workflows over the odte_core library.
//
// Exit codes: 0 success, 1 runtime error (missing files, malformed data),
// 2 usage error (bad flags, invalid hyperparameters, bad grid spec).

#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odte/dataset.hpp"
#include "odte/ensemble.hpp"
#include "odte/evaluate.hpp"
#include "odte/random.hpp"
#include "odte/serialize.hpp"
#include "odte/stats.hpp"
#include "odte/stree.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct CommonOptions {
    std::string data;
    std::string label_column;
    std::uint64_t seed = 57;
    std::size_t threads = 0;  // 0 = all cores
    bool standardize = false;
    bool no_timestamp = false;
    std::string out;
};

struct HyperOptions {
    double C = 1.0;
    std::string kernel = "linear";
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;
    std::string strategy = "ovo";
    std::string splitter = "random";
    std::int64_t max_depth = -1;  // -1 = unlimited
    std::size_t max_iter = 100000;
    double tol = 0.0;  // 0 = solver default
    std::size_t n_trees = 100;
    std::size_t max_features = 0;
    std::size_t bootstrap_size = 0;
};

void add_common_flags(CLI::App& cmd, CommonOptions& options) {
    cmd.add_option("--data", options.data, "Input CSV file")->required();
    cmd.add_option("--label-column", options.label_column,
                   "Label column name (default: last column)");
    cmd.add_option("--seed", options.seed, "Root random seed")->capture_default_str();
    cmd.add_option("--threads", options.threads,
                   "Worker threads (0 = all cores); results are thread-count independent")
        ->capture_default_str();
    cmd.add_flag("--standardize", options.standardize,
                 "Standardize features (fitted on training data only)");
    cmd.add_flag("--no-timestamp", options.no_timestamp,
                 "Omit timestamps/timing from report files for byte-identical output");
    cmd.add_option("--out", options.out, "Output path (file or report prefix)");
}

void add_hyper_flags(CLI::App& cmd, HyperOptions& options) {
    cmd.add_option("--C", options.C, "SVM regularization strength")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--kernel", options.kernel, "SVM kernel")
        ->check(CLI::IsMember({"linear", "polynomial", "poly", "rbf"}))
        ->capture_default_str();
    cmd.add_option("--gamma", options.gamma, "Kernel coefficient (poly/rbf)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--degree", options.degree, "Polynomial kernel degree")
        ->check(CLI::Range(1, 1'000'000))
        ->capture_default_str();
    cmd.add_option("--coef0", options.coef0, "Polynomial kernel offset")->capture_default_str();
    cmd.add_option("--strategy", options.strategy, "Multiclass strategy")
        ->check(CLI::IsMember({"ovo", "ovr"}))
        ->capture_default_str();
    cmd.add_option("--splitter", options.splitter, "Candidate selection rule")
        ->check(CLI::IsMember({"best", "random"}))
        ->capture_default_str();
    cmd.add_option("--max-depth", options.max_depth, "Maximum tree depth (unlimited if omitted)")
        ->check(CLI::Range(std::int64_t(0), std::int64_t(1) << 40));
    cmd.add_option("--max-iter", options.max_iter, "Solver iteration cap")
        ->check(CLI::Range(std::size_t(1), std::size_t(1) << 40))
        ->capture_default_str();
    cmd.add_option("--tol", options.tol,
                   "Solver stopping tolerance (default: 1e-4 linear, 1e-3 kernel)")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--n-trees", options.n_trees, "Number of trees in the ensemble")
        ->check(CLI::Range(std::size_t(1), std::size_t(1) << 31))
        ->capture_default_str();
    cmd.add_option("--max-features", options.max_features,
                   "Per-tree feature subset size (0 = all features)")
        ->capture_default_str();
    cmd.add_option("--bootstrap-size", options.bootstrap_size,
                   "Bootstrap sample size (0 = training set size)")
        ->capture_default_str();
}

odte::OdteParams build_params(const CommonOptions& common, const HyperOptions& hyper) {
    odte::OdteParams params;
    params.n_trees = hyper.n_trees;
    params.bootstrap_size = hyper.bootstrap_size;
    params.max_features = hyper.max_features;
    params.seed = common.seed;
    params.base.seed = common.seed;
    params.base.svm.C = hyper.C;
    if (hyper.kernel == "linear") {
        params.base.svm.kernel.kind = odte::KernelKind::linear;
    } else if (hyper.kernel == "rbf") {
        params.base.svm.kernel.kind = odte::KernelKind::rbf;
    } else {
        params.base.svm.kernel.kind = odte::KernelKind::polynomial;
    }
    params.base.svm.kernel.gamma = hyper.gamma;
    params.base.svm.kernel.degree = hyper.degree;
    params.base.svm.kernel.coef0 = hyper.coef0;
    params.base.svm.max_iter = hyper.max_iter;
    params.base.svm.tol = hyper.tol;
    params.base.strategy = hyper.strategy == "ovo" ? odte::MulticlassStrategy::one_vs_one
                                                   : odte::MulticlassStrategy::one_vs_rest;
    params.base.splitter =
        hyper.splitter == "best" ? odte::Splitter::best : odte::Splitter::random;
    params.base.max_depth =
        hyper.max_depth < 0 ? odte::kUnlimited : std::size_t(hyper.max_depth);
    return params;
}

std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open file for writing: " + path);
    }
    file << content;
    if (!file) {
        throw std::runtime_error("failed writing file: " + path);
    }
}

// ---- fit ----------------------------------------------------------------

int run_fit(const CommonOptions& common, const HyperOptions& hyper) {
    const odte::Dataset dataset =
        odte::load_csv(common.data, odte::CsvOptions{common.label_column, true});
    const odte::OdteParams params = build_params(common, hyper);

    const auto start = std::chrono::steady_clock::now();
    odte::Ensemble ensemble;
    if (common.standardize) {
        const odte::SampleView all(dataset);
        const odte::StandardScaler scaler = odte::StandardScaler::fit(all);
        ensemble = odte::fit_ensemble(scaler.apply(all), params, common.threads);
        ensemble.scaler = scaler;
    } else {
        ensemble = odte::fit_ensemble(dataset, params, common.threads);
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    odte::save_model(ensemble, common.out);

    const auto stats = odte::ensemble_size_stats(ensemble);
    json summary{{"command", "fit"},
                 {"data", common.data},
                 {"model", common.out},
                 {"n_trees", ensemble.trees.size()},
                 {"mean_nodes", stats.mean_nodes},
                 {"max_depth_observed", stats.max_depth_observed},
                 {"wall_time_seconds", elapsed}};
    if (!common.no_timestamp) summary["timestamp"] = utc_timestamp();
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---- predict ------------------------------------------------------------

std::size_t required_input_dimension(const odte::Ensemble& ensemble) {
    if (ensemble.scaler) return ensemble.scaler->mean().size();
    std::size_t dim = 0;
    const std::function<void(const odte::TreeNode&)> walk = [&](const odte::TreeNode& node) {
        if (node.is_leaf()) return;
        if (node.feature_subset.empty()) {
            dim = std::max(dim, node.model->input_dimension());
        } else {
            for (const std::size_t c : node.feature_subset) dim = std::max(dim, c + 1);
        }
        walk(*node.positive);
        walk(*node.negative);
    };
    for (const auto& tree : ensemble.trees) walk(*tree.root);
    return dim;
}

int run_predict(const std::string& model_path, const CommonOptions& common) {
    const odte::Ensemble ensemble = odte::load_model(model_path);
    if (ensemble.trees.empty()) {
        throw std::runtime_error("model file contains no trees");
    }
    const std::size_t dim = required_input_dimension(ensemble);

    std::ifstream file(common.data);
    if (!file) {
        throw std::runtime_error("cannot open file: " + common.data);
    }
    std::string line;
    if (!std::getline(file, line)) {
        throw std::runtime_error("empty file: " + common.data);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    {
        std::stringstream stream(line);
        std::string field;
        while (std::getline(stream, field, ',')) header.push_back(field);
    }

    // Columns used as features: all of them, unless a label column must be
    // dropped (named explicitly, or the trailing extra column of a training
    // file).
    std::ptrdiff_t drop = -1;
    if (!common.label_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), common.label_column);
        if (it == header.end()) {
            throw std::runtime_error("label column '" + common.label_column + "' not found");
        }
        drop = it - header.begin();
    } else if (header.size() == dim + 1) {
        drop = std::ptrdiff_t(header.size()) - 1;
    }
    const std::size_t width = header.size() - (drop >= 0 ? 1 : 0);
    if (width != dim) {
        throw std::runtime_error("input has " + std::to_string(width) +
                                 " feature columns, model expects " + std::to_string(dim));
    }

    std::ostringstream out;
    std::size_t line_no = 1;
    std::vector<double> row(width);
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream stream(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(stream, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != header.size()) {
            throw std::runtime_error("line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        }
        std::size_t c = 0;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (std::ptrdiff_t(f) == drop) continue;
            const std::string& text = fields[f];
            double value = 0.0;
            const auto result =
                std::from_chars(text.data(), text.data() + text.size(), value);
            if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
                throw std::runtime_error("non-numeric value '" + text + "' at line " +
                                         std::to_string(line_no));
            }
            row[c++] = value;
        }
        const int label = odte::predict_ensemble(ensemble, row);
        out << ensemble.vocabulary[std::size_t(label)] << '\n';
    }

    if (common.out.empty()) {
        std::cout << out.str();
    } else {
        write_text_file(common.out, out.str());
    }
    return 0;
}

// ---- cv -----------------------------------------------------------------

int run_cv(const CommonOptions& common, const HyperOptions& hyper, std::size_t repetitions,
           std::size_t folds) {
    const odte::Dataset dataset =
        odte::load_csv(common.data, odte::CsvOptions{common.label_column, true});
    const odte::OdteParams params = build_params(common, hyper);

    odte::CvParams cv;
    cv.repetitions = repetitions;
    cv.folds = folds;
    cv.standardize = common.standardize;
    cv.threads = common.threads;

    const odte::CvReport report = odte::cross_validate(
        dataset, params, cv, std::filesystem::path(common.data).stem().string());

    const std::string prefix = common.out.empty() ? "cv_report" : common.out;
    std::ostringstream csv;
    odte::write_cv_csv(report, csv);
    write_text_file(prefix + ".csv", csv.str());

    json file_summary = odte::cv_to_json(report, !common.no_timestamp);
    if (!common.no_timestamp) file_summary["timestamp"] = utc_timestamp();
    write_text_file(prefix + ".json", file_summary.dump(2) + "\n");

    json summary = odte::cv_to_json(report, true);
    summary["command"] = "cv";
    summary["report_csv"] = prefix + ".csv";
    summary["report_json"] = prefix + ".json";
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---- tune ---------------------------------------------------------------

int run_tune(const CommonOptions& common, const HyperOptions& hyper,
             const std::string& grid_path, std::size_t repetitions, std::size_t folds) {
    const odte::Dataset dataset =
        odte::load_csv(common.data, odte::CsvOptions{common.label_column, true});
    const odte::OdteParams base = build_params(common, hyper);

    std::ifstream grid_file(grid_path);
    if (!grid_file) {
        throw std::runtime_error("cannot open file: " + grid_path);
    }
    ordered_json grid_json;
    try {
        grid_json = ordered_json::parse(grid_file);
    } catch (const ordered_json::exception& e) {
        // A grid file that does not parse is a bad grid spec: usage error.
        std::cerr << "error: malformed grid file: " << e.what() << '\n';
        return 2;
    }

    odte::GridSpec grid;
    {
        // Grid problems are usage errors: report and exit 2 before any work.
        std::string usage_error;
        if (!grid_json.is_object() || grid_json.empty()) {
            usage_error = "grid must be a non-empty JSON object of flag -> value list";
        } else {
            for (const auto& [name, values] : grid_json.items()) {
                if (!values.is_array() || values.empty()) {
                    usage_error = "grid entry '" + name + "' must be a non-empty array";
                    break;
                }
                grid.entries.emplace_back(name,
                                          std::vector<json>(values.begin(), values.end()));
            }
        }
        if (usage_error.empty()) {
            try {
                for (const auto& [name, values] : grid.entries) {
                    for (const auto& value : values) {
                        odte::OdteParams scratch = base;
                        odte::apply_hyperparameter(scratch, name, value);
                    }
                }
            } catch (const std::invalid_argument& e) {
                usage_error = e.what();
            }
        }
        if (!usage_error.empty()) {
            std::cerr << "error: " << usage_error << '\n';
            return 2;
        }
    }

    odte::CvParams inner;
    inner.repetitions = repetitions;
    inner.folds = folds;
    inner.standardize = common.standardize;
    inner.threads = common.threads;

    const odte::GridSearchResult result = odte::grid_search(dataset, base, grid, inner);

    json best = json::object();
    for (const auto& [name, value] : result.table[result.best_index].assignment) {
        best[name] = value;
    }
    json table = json::array();
    for (const auto& point : result.table) {
        json row = json::object();
        for (const auto& [name, value] : point.assignment) row[name] = value;
        row["mean_accuracy"] = point.mean;
        row["std_accuracy"] = point.stddev;
        table.push_back(std::move(row));
    }
    json summary{{"command", "tune"},
                 {"data", common.data},
                 {"best", best},
                 {"best_mean_accuracy", result.best_mean},
                 {"table", table}};
    if (!common.no_timestamp) summary["timestamp"] = utc_timestamp();

    const std::string prefix = common.out.empty() ? "tune_report" : common.out;
    write_text_file(prefix + ".json", summary.dump(2) + "\n");
    std::ostringstream csv;
    {
        csv << "point,mean_accuracy,std_accuracy\n";
        for (const auto& point : result.table) {
            json row = json::object();
            for (const auto& [name, value] : point.assignment) row[name] = value;
            csv << row.dump() << ',' << json(point.mean).dump() << ','
                << json(point.stddev).dump() << '\n';
        }
    }
    write_text_file(prefix + ".csv", csv.str());
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---- compare ------------------------------------------------------------

int run_compare(const CommonOptions& common, const std::string& control, double alpha) {
    std::vector<std::string> algorithms, datasets;
    const odte::Matrix matrix =
        odte::read_accuracy_matrix_csv(common.data, algorithms, datasets);
    const odte::ComparisonReport report =
        odte::compare_classifiers(algorithms, datasets, matrix, alpha, control);

    json summary = odte::comparison_to_json(report);
    summary["command"] = "compare";
    if (!common.no_timestamp) summary["timestamp"] = utc_timestamp();

    if (!common.out.empty()) {
        json file_summary = odte::comparison_to_json(report);
        if (!common.no_timestamp) file_summary["timestamp"] = utc_timestamp();
        write_text_file(common.out + ".json", file_summary.dump(2) + "\n");
        std::ostringstream csv;
        odte::write_comparison_csv(report, csv);
        write_text_file(common.out + ".csv", csv.str());
        summary["report_csv"] = common.out + ".csv";
        summary["report_json"] = common.out + ".json";
    }
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oblique decision tree ensembles (SVM-split trees, bagging, CV harness)"};
    app.require_subcommand(1);

    CommonOptions fit_common, predict_common, cv_common, tune_common, compare_common;
    HyperOptions fit_hyper, cv_hyper, tune_hyper;
    std::string predict_model, tune_grid, compare_control;
    std::size_t cv_repetitions = 10, cv_folds = 5;
    std::size_t tune_repetitions = 1, tune_folds = 5;
    double compare_alpha = 0.05;

    CLI::App* fit = app.add_subcommand("fit", "Train an ensemble and save the model");
    add_common_flags(*fit, fit_common);
    add_hyper_flags(*fit, fit_hyper);
    fit->get_option("--out")->required()->description("Model JSON output path");

    CLI::App* predict = app.add_subcommand("predict", "Predict labels with a saved model");
    predict->add_option("--model", predict_model, "Model JSON file")->required();
    add_common_flags(*predict, predict_common);

    CLI::App* cv = app.add_subcommand("cv", "Repeated stratified cross-validation");
    add_common_flags(*cv, cv_common);
    add_hyper_flags(*cv, cv_hyper);
    cv->add_option("--repetitions", cv_repetitions, "CV repetitions")
        ->check(CLI::Range(std::size_t(1), std::size_t(1) << 20))
        ->capture_default_str();
    cv->add_option("--folds", cv_folds, "CV folds")
        ->check(CLI::Range(std::size_t(2), std::size_t(1) << 20))
        ->capture_default_str();

    CLI::App* tune = app.add_subcommand("tune", "Grid search over hyperparameters");
    add_common_flags(*tune, tune_common);
    add_hyper_flags(*tune, tune_hyper);
    tune->add_option("--grid", tune_grid, "Grid JSON file (flag name -> value list)")
        ->required();
    tune->add_option("--repetitions", tune_repetitions, "Inner CV repetitions")
        ->check(CLI::Range(std::size_t(1), std::size_t(1) << 20))
        ->capture_default_str();
    tune->add_option("--folds", tune_folds, "Inner CV folds")
        ->check(CLI::Range(std::size_t(2), std::size_t(1) << 20))
        ->capture_default_str();

    CLI::App* compare = app.add_subcommand("compare", "Friedman + Holm comparison of a matrix");
    add_common_flags(*compare, compare_common);
    compare->add_option("--control", compare_control,
                        "Control algorithm (default: best ranked)");
    compare->add_option("--alpha", compare_alpha, "Significance level")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (fit->parsed()) return run_fit(fit_common, fit_hyper);
        if (predict->parsed()) return run_predict(predict_model, predict_common);
        if (cv->parsed()) return run_cv(cv_common, cv_hyper, cv_repetitions, cv_folds);
        if (tune->parsed()) {
            return run_tune(tune_common, tune_hyper, tune_grid, tune_repetitions, tune_folds);
        }
        if (compare->parsed()) return run_compare(compare_common, compare_control, compare_alpha);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
