// Python bindings for the core workflows: load data, fit/predict ensembles,
// save/load models, cross-validate, and compare accuracy matrices.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odte/dataset.hpp"
#include "odte/ensemble.hpp"
#include "odte/evaluate.hpp"
#include "odte/serialize.hpp"
#include "odte/stats.hpp"
#include "odte/stree.hpp"

namespace py = pybind11;

namespace {

odte::Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    odte::Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw std::invalid_argument("ragged row " + std::to_string(r));
        }
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

nlohmann::json value_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    throw std::invalid_argument("unsupported hyperparameter value type");
}

odte::OdteParams params_from_kwargs(const py::kwargs& kwargs) {
    odte::OdteParams params;
    for (const auto& item : kwargs) {
        // Python identifiers use underscores; the parameter names use dashes.
        std::string flag = py::str(item.first);
        for (auto& ch : flag) {
            if (ch == '_') ch = '-';
        }
        if (flag == "seed") {
            params.seed = item.second.cast<std::uint64_t>();
            params.base.seed = params.seed;
            continue;
        }
        odte::apply_hyperparameter(params, flag, value_to_json(item.second));
    }
    return params;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Oblique decision tree ensembles (SVM-split trees with bagging)";

    py::class_<odte::Dataset>(m, "Dataset")
        .def(py::init([](const std::vector<std::vector<double>>& rows,
                         const std::vector<std::string>& labels) {
                 if (rows.size() != labels.size()) {
                     throw std::invalid_argument("rows and labels must have equal length");
                 }
                 std::vector<std::string> vocabulary;
                 std::vector<int> encoded;
                 for (const auto& label : labels) {
                     auto it = std::find(vocabulary.begin(), vocabulary.end(), label);
                     if (it == vocabulary.end()) {
                         vocabulary.push_back(label);
                         it = std::prev(vocabulary.end());
                     }
                     encoded.push_back(int(it - vocabulary.begin()));
                 }
                 auto features = matrix_from_rows(rows);
                 std::vector<std::string> names;
                 for (std::size_t c = 0; c < features.cols; ++c) {
                     names.push_back("f" + std::to_string(c));
                 }
                 return odte::Dataset(std::move(features), std::move(encoded),
                                      std::move(vocabulary), std::move(names));
             }),
             py::arg("rows"), py::arg("labels"))
        .def_property_readonly("rows", &odte::Dataset::rows)
        .def_property_readonly("cols", &odte::Dataset::cols)
        .def_property_readonly("classes", &odte::Dataset::classes)
        .def_property_readonly("vocabulary", &odte::Dataset::vocabulary)
        .def_property_readonly("feature_names", &odte::Dataset::feature_names)
        .def("label", &odte::Dataset::label, py::arg("row"));

    m.def(
        "load_csv",
        [](const std::string& path, const std::string& label_column, bool has_header) {
            return odte::load_csv(path, odte::CsvOptions{label_column, has_header});
        },
        py::arg("path"), py::arg("label_column") = "", py::arg("has_header") = true,
        "Load a CSV of numeric features plus one label column.");

    py::class_<odte::Ensemble>(m, "Ensemble")
        .def_property_readonly("n_trees",
                               [](const odte::Ensemble& e) { return e.trees.size(); })
        .def_property_readonly("vocabulary",
                               [](const odte::Ensemble& e) { return e.vocabulary; })
        .def("predict",
             [](const odte::Ensemble& e, const std::vector<double>& x) {
                 return e.vocabulary[std::size_t(odte::predict_ensemble(e, x))];
             },
             py::arg("x"), "Predict the label name for one feature row.")
        .def("predict_batch",
             [](const odte::Ensemble& e, const std::vector<std::vector<double>>& rows) {
                 std::vector<std::string> labels;
                 labels.reserve(rows.size());
                 for (const auto& row : rows) {
                     labels.push_back(
                         e.vocabulary[std::size_t(odte::predict_ensemble(e, row))]);
                 }
                 return labels;
             },
             py::arg("rows"), "Predict label names for many feature rows.")
        .def("to_json",
             [](const odte::Ensemble& e) { return odte::ensemble_to_json(e).dump(); })
        .def("save", [](const odte::Ensemble& e, const std::string& path) {
            odte::save_model(e, path);
        });

    m.def(
        "fit",
        [](const odte::Dataset& dataset, std::size_t threads, const py::kwargs& kwargs) {
            return odte::fit_ensemble(dataset, params_from_kwargs(kwargs), threads);
        },
        py::arg("dataset"), py::arg("threads") = 1,
        "Train an ensemble; hyperparameters as keyword arguments "
        "(n_trees, C, kernel, strategy, splitter, max_depth, seed, ...).");

    m.def("load_model", &odte::load_model, py::arg("path"));

    m.def(
        "cross_validate",
        [](const odte::Dataset& dataset, std::size_t repetitions, std::size_t folds,
           bool standardize, std::size_t threads, const py::kwargs& kwargs) {
            odte::CvParams cv;
            cv.repetitions = repetitions;
            cv.folds = folds;
            cv.standardize = standardize;
            cv.threads = threads;
            const auto report =
                odte::cross_validate(dataset, params_from_kwargs(kwargs), cv, "");
            py::dict result;
            result["fold_accuracies"] = report.fold_accuracies;
            result["mean"] = report.mean;
            result["stddev"] = report.stddev;
            result["seeds_used"] = report.seeds_used;
            result["mean_tree_nodes"] = report.mean_tree_nodes;
            return result;
        },
        py::arg("dataset"), py::arg("repetitions") = 10, py::arg("folds") = 5,
        py::arg("standardize") = false, py::arg("threads") = 1,
        "Repeated stratified cross-validation; returns a summary dict.");

    m.def(
        "compare",
        [](const std::vector<std::string>& algorithms,
           const std::vector<std::string>& datasets,
           const std::vector<std::vector<double>>& accuracy, double alpha,
           const std::string& control) {
            const auto report = odte::compare_classifiers(
                algorithms, datasets, matrix_from_rows(accuracy), alpha, control);
            py::dict result;
            result["control"] = report.control;
            result["friedman_statistic"] = report.friedman.statistic;
            result["friedman_pvalue"] = report.friedman.p_value;
            py::list rows;
            for (const auto& row : report.rows) {
                py::dict entry;
                entry["classifier"] = row.algorithm;
                entry["rank"] = row.avg_rank;
                entry["control"] = row.is_control;
                if (!row.is_control) {
                    entry["pvalue_adjusted"] = row.adjusted_p;
                    entry["rejected"] = row.rejected;
                    entry["win"] = row.win;
                    entry["tie"] = row.tie;
                    entry["loss"] = row.loss;
                }
                rows.append(entry);
            }
            result["rows"] = rows;
            return result;
        },
        py::arg("algorithms"), py::arg("datasets"), py::arg("accuracy"),
        py::arg("alpha") = 0.05, py::arg("control") = std::string(),
        "Friedman + Holm comparison of an accuracy matrix.");
}
