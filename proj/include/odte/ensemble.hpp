#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odte/dataset.hpp"
#include "odte/stree.hpp"

namespace odte {

struct OdteParams {
    std::size_t n_trees = 100;
    StreeParams base;
    std::size_t bootstrap_size = 0;  // 0 = dataset size
    std::size_t max_features = 0;    // 0 = all; when set, overrides base.max_features
    std::uint64_t seed = 57;
};

struct Ensemble {
    Ensemble() = default;
    // Trees own their node graphs through unique_ptr, so an ensemble is
    // move-only.  Deleting the copy operations (rather than letting
    // vector<Tree>'s unconstrained copy constructor fail at instantiation)
    // keeps is_copy_constructible accurate for generic code.
    Ensemble(const Ensemble&) = delete;
    Ensemble& operator=(const Ensemble&) = delete;
    Ensemble(Ensemble&&) = default;
    Ensemble& operator=(Ensemble&&) = default;

    std::vector<Tree> trees;
    std::vector<std::string> vocabulary;
    OdteParams params;
    std::vector<std::uint64_t> per_tree_seeds;
    int schema_version = 1;
    // When present, applied to every input row before routing (fitted on the
    // training split by the caller; serialized with the model).
    std::optional<StandardScaler> scaler;
};

// Trains n_trees STrees, tree i on bootstrap(dataset, bootstrap_size, seed_i)
// with seed_i = mix(seed, i).  Trees may be trained concurrently; the result
// is identical for any thread count because all randomness is derived from
// per-index seeds.
Ensemble fit_ensemble(const Dataset& dataset, const OdteParams& params,
                      std::size_t threads = 1);

// Majority vote over the trees; ties resolve to the lowest vocabulary index.
int predict_ensemble(const Ensemble& ensemble, std::span<const double> x);

// Per-label vote counts for one input (sums to n_trees).
std::vector<std::size_t> vote_counts(const Ensemble& ensemble, std::span<const double> x);

std::vector<int> predict_batch(const Ensemble& ensemble, const Matrix& rows);

struct EnsembleSizeStats {
    double mean_nodes = 0.0;
    std::size_t max_depth_observed = 0;
    std::vector<std::size_t> per_tree_nodes;
};

EnsembleSizeStats ensemble_size_stats(const Ensemble& ensemble);

}  // namespace odte
