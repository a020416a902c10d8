#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "odte/dataset.hpp"

namespace testutil {

inline std::filesystem::path data_dir() {
    if (const char* env = std::getenv("ODTE_DATA_DIR")) return env;
    return "../data";
}

inline std::filesystem::path temp_dir() {
    static const std::filesystem::path dir = [] {
        auto path = std::filesystem::temp_directory_path() /
                    ("odte_tests_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
        return path;
    }();
    return dir;
}

inline std::filesystem::path write_file(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream file(path);
    file << content;
    return path;
}

// Builds an in-memory dataset from rows and label names (vocabulary in
// first-appearance order, mirroring load_csv).
inline odte::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                  const std::vector<std::string>& labels) {
    odte::Matrix features(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r].begin(), rows[r].end(), features.row(r).begin());
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
    std::vector<std::string> names;
    for (std::size_t c = 0; c < features.cols; ++c) names.push_back("f" + std::to_string(c));
    return odte::Dataset(std::move(features), std::move(encoded), std::move(vocabulary),
                         std::move(names));
}

// Random blob dataset: `classes` Gaussian clusters in `dims` dimensions.
inline odte::Dataset random_blobs(std::size_t rows, std::size_t dims, std::size_t classes,
                                  unsigned seed, double spread = 1.0) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<std::vector<double>> features;
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t c = r % classes;
        std::vector<double> row(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            const double center = (d + 1) * double((c * 7 + d * 3) % (2 * classes)) - double(classes);
            row[d] = center + noise(gen);
        }
        features.push_back(std::move(row));
        labels.push_back("c" + std::to_string(c));
    }
    return make_dataset(features, labels);
}

}  // namespace testutil
