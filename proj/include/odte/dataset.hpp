#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "odte/matrix.hpp"

namespace odte {

// In-memory labelled dataset.  Features are dense doubles, labels are indices
// into a vocabulary of the distinct label strings in first-appearance order.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix features, std::vector<int> labels,
            std::vector<std::string> vocabulary,
            std::vector<std::string> feature_names);

    std::size_t rows() const { return features_.rows; }
    std::size_t cols() const { return features_.cols; }
    std::size_t classes() const { return vocabulary_.size(); }

    std::span<const double> row(std::size_t i) const { return features_.row(i); }
    int label(std::size_t i) const { return labels_[i]; }

    const Matrix& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

private:
    Matrix features_;
    std::vector<int> labels_;
    std::vector<std::string> vocabulary_;
    std::vector<std::string> feature_names_;
};

struct CsvOptions {
    // Name of the label column; empty means the last column.
    std::string label_column{};
    // When false the first line is data; feature names are synthesized and the
    // label column must be the last one.
    bool has_header = true;
};

// Parses a CSV of numeric features plus one label column.  The vocabulary
// lists distinct labels in first-appearance order; this order drives all
// downstream tie-breaking.  Throws std::runtime_error naming the offending
// line/column on malformed input (missing values, non-numeric features,
// unknown label column, ragged rows).
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// A multiset of rows of a parent dataset (duplicates allowed, e.g. bootstrap
// resamples).  Views are cheap to copy; the parent must outlive them.
class SampleView {
public:
    explicit SampleView(const Dataset& parent);
    SampleView(const Dataset& parent, std::vector<std::size_t> rows);

    std::size_t size() const { return rows_.size(); }
    const Dataset& parent() const { return *parent_; }
    std::size_t row_index(std::size_t i) const { return rows_[i]; }
    const std::vector<std::size_t>& row_indices() const { return rows_; }

    std::span<const double> row(std::size_t i) const { return parent_->row(rows_[i]); }
    int label(std::size_t i) const { return parent_->label(rows_[i]); }

    // Per-class occurrence counts over the full parent vocabulary.
    std::vector<std::size_t> label_counts() const;
    // Number of classes with at least one row in the view.
    std::size_t distinct_labels() const;

private:
    const Dataset* parent_ = nullptr;
    std::vector<std::size_t> rows_;
};

// Copies the viewed rows into a standalone dataset (vocabulary preserved).
Dataset materialize(const SampleView& view);

// Bootstrap resample: `size` rows drawn uniformly with replacement.
SampleView bootstrap(const Dataset& dataset, std::size_t size, std::uint64_t seed);

struct FoldPair {
    SampleView train;
    SampleView test;
};

// Stratified k-fold partition: every row lands in exactly one test fold and
// per-class counts across folds differ by at most one.  Throws if folds < 2
// or folds > rows.
std::vector<FoldPair> stratified_kfold(const Dataset& dataset, std::size_t folds,
                                       std::uint64_t seed);

// Column-wise standardization fitted on a training view.  Columns with zero
// variance are passed through unchanged (divisor clamped to 1).
class StandardScaler {
public:
    static StandardScaler fit(const SampleView& train);
    StandardScaler() = default;
    StandardScaler(std::vector<double> mean, std::vector<double> stddev);

    // Materializes a standardized copy of the viewed rows (labels preserved).
    Dataset apply(const SampleView& view) const;
    std::vector<double> apply(std::span<const double> row) const;

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& stddev() const { return stddev_; }

private:
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

}  // namespace odte
