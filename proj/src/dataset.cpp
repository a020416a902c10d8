#include "odte/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "odte/random.hpp"

namespace odte {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& raw, std::size_t line_no,
                    const std::string& column) {
    const std::string text = trim(raw);
    if (text.empty()) {
        throw std::runtime_error("missing value at line " + std::to_string(line_no) +
                                 ", column '" + column + "'");
    }
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc() || result.ptr != last) {
        throw std::runtime_error("non-numeric value '" + text + "' at line " +
                                 std::to_string(line_no) + ", column '" + column + "'");
    }
    return value;
}

}  // namespace

Dataset::Dataset(Matrix features, std::vector<int> labels,
                 std::vector<std::string> vocabulary,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      vocabulary_(std::move(vocabulary)),
      feature_names_(std::move(feature_names)) {
    if (labels_.size() != features_.rows) {
        throw std::invalid_argument("dataset: label count does not match row count");
    }
    if (feature_names_.size() != features_.cols) {
        throw std::invalid_argument("dataset: feature name count does not match column count");
    }
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open file: " + path.string());
    }

    std::string line;
    if (!std::getline(file, line)) {
        throw std::runtime_error("empty file: " + path.string());
    }
    std::vector<std::string> header;
    std::size_t line_no = 1;
    if (options.has_header) {
        header = split_csv_line(line);
        for (auto& name : header) name = trim(name);
    } else {
        const std::size_t width = split_csv_line(line).size();
        for (std::size_t c = 0; c + 1 < width; ++c) header.push_back("f" + std::to_string(c));
        header.push_back("label");
        if (!options.label_column.empty()) {
            throw std::runtime_error("label column by name requires a header");
        }
        line_no = 0;  // reprocess the first line as data below
        file.seekg(0);
    }
    if (header.empty()) {
        throw std::runtime_error("empty header in " + path.string());
    }

    std::size_t label_index = header.size() - 1;
    if (!options.label_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), options.label_column);
        if (it == header.end()) {
            throw std::runtime_error("label column '" + options.label_column +
                                     "' not found in " + path.string());
        }
        label_index = std::size_t(it - header.begin());
    }

    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_index) feature_names.push_back(header[c]);
    }
    if (feature_names.empty()) {
        throw std::runtime_error("no feature columns in " + path.string());
    }

    std::vector<double> values;
    std::vector<std::string> raw_labels;
    while (std::getline(file, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error("line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (c == label_index) {
                const std::string label = trim(fields[c]);
                if (label.empty()) {
                    throw std::runtime_error("missing label at line " + std::to_string(line_no));
                }
                raw_labels.push_back(label);
            } else {
                values.push_back(parse_number(fields[c], line_no, header[c]));
            }
        }
    }
    if (raw_labels.empty()) {
        throw std::runtime_error("no data rows in " + path.string());
    }

    // Vocabulary: distinct labels in first-appearance order; this order drives
    // every downstream tie-break.  Stored labels are vocabulary indices.
    std::vector<std::string> vocabulary;
    std::map<std::string, int> index_of;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& label : raw_labels) {
        const auto [it, inserted] = index_of.try_emplace(label, int(vocabulary.size()));
        if (inserted) vocabulary.push_back(label);
        labels.push_back(it->second);
    }

    Matrix features;
    features.rows = raw_labels.size();
    features.cols = feature_names.size();
    features.data = std::move(values);
    return Dataset(std::move(features), std::move(labels), std::move(vocabulary),
                   std::move(feature_names));
}

SampleView::SampleView(const Dataset& parent) : parent_(&parent) {
    rows_.resize(parent.rows());
    std::iota(rows_.begin(), rows_.end(), std::size_t{0});
}

SampleView::SampleView(const Dataset& parent, std::vector<std::size_t> rows)
    : parent_(&parent), rows_(std::move(rows)) {
    for (const std::size_t r : rows_) {
        if (r >= parent.rows()) {
            throw std::out_of_range("sample view row index out of range");
        }
    }
}

std::vector<std::size_t> SampleView::label_counts() const {
    std::vector<std::size_t> counts(parent_->classes(), 0);
    for (const std::size_t r : rows_) counts[std::size_t(parent_->label(r))]++;
    return counts;
}

std::size_t SampleView::distinct_labels() const {
    const auto counts = label_counts();
    return std::size_t(std::count_if(counts.begin(), counts.end(),
                                     [](std::size_t c) { return c > 0; }));
}

Dataset materialize(const SampleView& view) {
    const Dataset& parent = view.parent();
    Matrix features(view.size(), parent.cols());
    std::vector<int> labels(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto row = view.row(i);
        std::copy(row.begin(), row.end(), features.row(i).begin());
        labels[i] = view.label(i);
    }
    return Dataset(std::move(features), std::move(labels), parent.vocabulary(),
                   parent.feature_names());
}

SampleView bootstrap(const Dataset& dataset, std::size_t size, std::uint64_t seed) {
    if (dataset.rows() == 0) {
        throw std::invalid_argument("bootstrap: empty dataset");
    }
    if (size == 0) size = dataset.rows();
    Rng rng(seed);
    std::vector<std::size_t> rows(size);
    for (auto& r : rows) r = std::size_t(rng.below(dataset.rows()));
    return SampleView(dataset, std::move(rows));
}

std::vector<FoldPair> stratified_kfold(const Dataset& dataset, std::size_t folds,
                                       std::uint64_t seed) {
    if (folds < 2) {
        throw std::invalid_argument("stratified_kfold: folds must be at least 2");
    }
    if (folds > dataset.rows()) {
        throw std::invalid_argument("stratified_kfold: more folds than rows");
    }

    // Group rows by class (vocabulary order), shuffle each group, then deal
    // the rows round-robin.  The starting fold rotates with the class index so
    // remainder rows do not pile up in the first folds.
    std::vector<std::vector<std::size_t>> by_class(dataset.classes());
    for (std::size_t r = 0; r < dataset.rows(); ++r) {
        by_class[std::size_t(dataset.label(r))].push_back(r);
    }

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> test_rows(folds);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& group = by_class[c];
        rng.shuffle(group);
        for (std::size_t i = 0; i < group.size(); ++i) {
            test_rows[(i + c) % folds].push_back(group[i]);
        }
    }

    std::vector<FoldPair> result;
    result.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        auto& test = test_rows[f];
        std::sort(test.begin(), test.end());
        std::vector<char> in_test(dataset.rows(), 0);
        for (const std::size_t r : test) in_test[r] = 1;
        std::vector<std::size_t> train;
        train.reserve(dataset.rows() - test.size());
        for (std::size_t r = 0; r < dataset.rows(); ++r) {
            if (!in_test[r]) train.push_back(r);
        }
        result.push_back(FoldPair{SampleView(dataset, std::move(train)),
                                  SampleView(dataset, std::move(test))});
    }
    return result;
}

StandardScaler::StandardScaler(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
    if (mean_.size() != stddev_.size()) {
        throw std::invalid_argument("scaler: mean/stddev size mismatch");
    }
}

StandardScaler StandardScaler::fit(const SampleView& train) {
    if (train.size() == 0) {
        throw std::invalid_argument("scaler: empty training view");
    }
    const std::size_t n = train.parent().cols();
    std::vector<double> mean(n, 0.0), stddev(n, 0.0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto row = train.row(i);
        for (std::size_t c = 0; c < n; ++c) mean[c] += row[c];
    }
    for (auto& m : mean) m /= double(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto row = train.row(i);
        for (std::size_t c = 0; c < n; ++c) {
            const double d = row[c] - mean[c];
            stddev[c] += d * d;
        }
    }
    for (auto& s : stddev) {
        s = std::sqrt(s / double(train.size()));
        if (s == 0.0) s = 1.0;  // zero-variance column passes through unchanged
    }
    return StandardScaler(std::move(mean), std::move(stddev));
}

std::vector<double> StandardScaler::apply(std::span<const double> row) const {
    if (row.size() != mean_.size()) {
        throw std::invalid_argument("scaler: row width mismatch");
    }
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
        out[c] = (row[c] - mean_[c]) / stddev_[c];
    }
    return out;
}

Dataset StandardScaler::apply(const SampleView& view) const {
    const Dataset& parent = view.parent();
    if (parent.cols() != mean_.size()) {
        throw std::invalid_argument("scaler: dataset width mismatch");
    }
    Matrix features(view.size(), parent.cols());
    std::vector<int> labels(view.size());
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto row = view.row(i);
        auto out = features.row(i);
        for (std::size_t c = 0; c < parent.cols(); ++c) {
            out[c] = (row[c] - mean_[c]) / stddev_[c];
        }
        labels[i] = view.label(i);
    }
    return Dataset(std::move(features), std::move(labels), parent.vocabulary(),
                   parent.feature_names());
}

}  // namespace odte
