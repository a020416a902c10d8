#include "odte/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "odte/random.hpp"

namespace odte {

Ensemble fit_ensemble(const Dataset& dataset, const OdteParams& params,
                      std::size_t threads) {
    if (params.n_trees < 1) {
        throw std::invalid_argument("fit_ensemble: n_trees must be at least 1");
    }
    if (dataset.rows() == 0) {
        throw std::invalid_argument("fit_ensemble: empty dataset");
    }
    if (dataset.classes() < 2) {
        throw std::invalid_argument("fit_ensemble: single-class data");
    }

    Ensemble ensemble;
    ensemble.vocabulary = dataset.vocabulary();
    ensemble.params = params;
    ensemble.per_tree_seeds.resize(params.n_trees);
    for (std::size_t i = 0; i < params.n_trees; ++i) {
        ensemble.per_tree_seeds[i] = mix(params.seed, i);
    }
    const std::size_t bootstrap_size =
        params.bootstrap_size > 0 ? params.bootstrap_size : dataset.rows();

    StreeParams base = params.base;
    if (params.max_features > 0) base.max_features = params.max_features;

    ensemble.trees.resize(params.n_trees);
    const auto train_one = [&](std::size_t i) {
        const std::uint64_t seed_i = ensemble.per_tree_seeds[i];
        const SampleView sample = bootstrap(dataset, bootstrap_size, seed_i);
        StreeParams tree_params = base;
        tree_params.seed = mix(seed_i, 1);
        ensemble.trees[i] = build_tree(sample, tree_params);
    };

    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::max<std::size_t>(1, std::min(threads, params.n_trees));
    if (threads == 1) {
        for (std::size_t i = 0; i < params.n_trees; ++i) train_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        workers.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= params.n_trees) return;
                    try {
                        train_one(i);
                    } catch (...) {
                        const std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& worker : workers) worker.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    return ensemble;
}

std::vector<std::size_t> vote_counts(const Ensemble& ensemble, std::span<const double> x) {
    std::vector<std::size_t> votes(ensemble.vocabulary.size(), 0);
    std::vector<double> scaled;
    std::span<const double> input = x;
    if (ensemble.scaler) {
        scaled = ensemble.scaler->apply(x);
        input = scaled;
    }
    for (const Tree& tree : ensemble.trees) {
        const int label = predict_tree(*tree.root, input);
        if (label < 0 || std::size_t(label) >= votes.size()) {
            throw std::logic_error("predict_ensemble: tree voted outside vocabulary");
        }
        votes[std::size_t(label)]++;
    }
    return votes;
}

int predict_ensemble(const Ensemble& ensemble, std::span<const double> x) {
    if (ensemble.trees.empty()) {
        throw std::invalid_argument("predict_ensemble: empty ensemble");
    }
    const auto votes = vote_counts(ensemble, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return int(best);
}

std::vector<int> predict_batch(const Ensemble& ensemble, const Matrix& rows) {
    std::vector<int> out;
    out.reserve(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) {
        out.push_back(predict_ensemble(ensemble, rows.row(r)));
    }
    return out;
}

EnsembleSizeStats ensemble_size_stats(const Ensemble& ensemble) {
    EnsembleSizeStats stats;
    stats.per_tree_nodes.reserve(ensemble.trees.size());
    double total = 0.0;
    for (const Tree& tree : ensemble.trees) {
        const std::size_t nodes = node_count(*tree.root);
        stats.per_tree_nodes.push_back(nodes);
        total += double(nodes);
        stats.max_depth_observed = std::max(stats.max_depth_observed, tree_depth(*tree.root));
    }
    if (!ensemble.trees.empty()) {
        stats.mean_nodes = total / double(ensemble.trees.size());
    }
    return stats;
}

}  // namespace odte
