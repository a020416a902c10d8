#include "odte/stree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace odte {
namespace {

std::vector<std::size_t> count_labels(std::span<const int> labels) {
    std::size_t k = 0;
    for (const int label : labels) {
        if (label < 0) throw std::invalid_argument("entropy: negative label index");
        k = std::max(k, std::size_t(label) + 1);
    }
    std::vector<std::size_t> counts(k, 0);
    for (const int label : labels) counts[std::size_t(label)]++;
    return counts;
}

double entropy_of_counts(const std::vector<std::size_t>& counts, std::size_t total) {
    double h = 0.0;
    for (const std::size_t c : counts) {
        if (c == 0) continue;
        const double p = double(c) / double(total);
        h -= p * std::log2(p);
    }
    return h;
}

// Gathers the selected columns of the view rows into a dense matrix.  An
// empty subset means all columns.
Matrix gather(const SampleView& view, std::span<const std::size_t> subset) {
    const std::size_t n = subset.empty() ? view.parent().cols() : subset.size();
    Matrix out(view.size(), n);
    for (std::size_t i = 0; i < view.size(); ++i) {
        const auto row = view.row(i);
        auto dst = out.row(i);
        if (subset.empty()) {
            std::copy(row.begin(), row.end(), dst.begin());
        } else {
            for (std::size_t c = 0; c < subset.size(); ++c) dst[c] = row[subset[c]];
        }
    }
    return out;
}

struct Builder {
    const SampleView& view;
    const StreeParams& params;
    std::vector<std::size_t> feature_subset;
    Rng rng;
    TreeStats stats;

    Builder(const SampleView& v, const StreeParams& p) : view(v), params(p), rng(p.seed) {
        const std::size_t n = v.parent().cols();
        if (p.max_features > 0 && p.max_features < n) {
            // One uniform draw without replacement per tree (partial
            // Fisher-Yates), recorded in ascending order.
            std::vector<std::size_t> all(n);
            std::iota(all.begin(), all.end(), std::size_t{0});
            for (std::size_t i = 0; i < p.max_features; ++i) {
                std::swap(all[i], all[i + rng.below(n - i)]);
            }
            feature_subset.assign(all.begin(), all.begin() + std::ptrdiff_t(p.max_features));
            std::sort(feature_subset.begin(), feature_subset.end());
        } else if (p.max_features > n) {
            throw std::invalid_argument("stree: max_features exceeds feature count");
        }
    }

    std::unique_ptr<TreeNode> make_leaf(const std::vector<std::size_t>& positions,
                                        std::size_t depth) {
        auto node = std::make_unique<TreeNode>();
        node->depth = depth;
        node->counts.assign(view.parent().classes(), 0);
        for (const std::size_t p : positions) {
            node->counts[std::size_t(view.label(p))]++;
        }
        // Mode label; ties resolve to the lowest vocabulary index.
        std::size_t best = 0;
        for (std::size_t c = 1; c < node->counts.size(); ++c) {
            if (node->counts[c] > node->counts[best]) best = c;
        }
        node->label = int(best);
        return node;
    }

    std::unique_ptr<TreeNode> grow(const std::vector<std::size_t>& positions,
                                   std::size_t depth) {
        const std::size_t t = positions.size();
        std::vector<int> labels(t);
        for (std::size_t i = 0; i < t; ++i) labels[i] = view.label(positions[i]);

        std::vector<std::size_t> counts(view.parent().classes(), 0);
        for (const int label : labels) counts[std::size_t(label)]++;
        const std::size_t top = *std::max_element(counts.begin(), counts.end());
        const bool pure = double(top) >= params.min_purity * double(t);
        if (pure || depth >= params.max_depth || t < params.min_samples_split) {
            return make_leaf(positions, depth);
        }

        SampleView node_view(view.parent(), [&] {
            std::vector<std::size_t> rows(t);
            for (std::size_t i = 0; i < t; ++i) rows[i] = view.row_index(positions[i]);
            return rows;
        }());

        const auto candidates = enumerate_candidates(node_view, params.strategy);
        ++stats.expansion_attempts;
        std::vector<CandidateResult> results;
        results.reserve(candidates.size());
        std::vector<CandidateScore> scores;
        scores.reserve(candidates.size());
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            SvmParams svm_params = params.svm;
            svm_params.seed = rng.next_u64();
            results.push_back(evaluate_candidate(node_view, candidates[j], j, svm_params,
                                                 feature_subset));
            scores.push_back(results.back().score);
            ++stats.svm_trainings;
        }

        const std::size_t chosen = select_split(scores, params.splitter, rng);
        CandidateResult& winner = results[chosen];
        if (!(winner.score.ig > 0.0) || winner.pos.empty() || winner.neg.empty()) {
            return make_leaf(positions, depth);
        }

        auto node = std::make_unique<TreeNode>();
        node->depth = depth;
        node->node_ig = winner.score.ig;
        node->model = std::make_unique<SvmModel>(std::move(winner.model));
        node->feature_subset = feature_subset;

        // Candidate partitions index node_view, which shares ordering with
        // `positions`; translate back before recursing.
        std::vector<std::size_t> pos_positions(winner.pos.size());
        for (std::size_t i = 0; i < winner.pos.size(); ++i) {
            pos_positions[i] = positions[winner.pos[i]];
        }
        std::vector<std::size_t> neg_positions(winner.neg.size());
        for (std::size_t i = 0; i < winner.neg.size(); ++i) {
            neg_positions[i] = positions[winner.neg[i]];
        }
        results.clear();  // free candidate models before recursing

        node->positive = grow(pos_positions, depth + 1);
        node->negative = grow(neg_positions, depth + 1);
        return node;
    }
};

}  // namespace

double shannon_entropy(std::span<const int> labels) {
    if (labels.empty()) {
        throw std::invalid_argument("entropy: empty input");
    }
    return entropy_of_counts(count_labels(labels), labels.size());
}

double information_gain(std::span<const int> parent, std::span<const int> pos,
                        std::span<const int> neg) {
    if (parent.size() != pos.size() + neg.size()) {
        throw std::invalid_argument("information_gain: children do not partition parent");
    }
    const auto parent_counts = count_labels(parent);
    auto child_counts = pos.empty() ? std::vector<std::size_t>(parent_counts.size(), 0)
                                    : count_labels(pos);
    child_counts.resize(parent_counts.size(), 0);
    for (const int label : neg) {
        if (label < 0 || std::size_t(label) >= child_counts.size()) {
            throw std::invalid_argument("information_gain: children do not partition parent");
        }
        child_counts[std::size_t(label)]++;
    }
    if (child_counts != parent_counts) {
        throw std::invalid_argument("information_gain: children do not partition parent");
    }

    const double t = double(parent.size());
    const double h_parent = entropy_of_counts(parent_counts, parent.size());
    double h_children = 0.0;
    if (!pos.empty()) {
        h_children += (double(pos.size()) / t) * shannon_entropy(pos);
    }
    if (!neg.empty()) {
        h_children += (double(neg.size()) / t) * shannon_entropy(neg);
    }
    double gain = h_parent - h_children;
    // Conditioning cannot increase empirical entropy; only rounding noise can
    // push the difference out of [0, h_parent].
    if (gain < 0.0) {
        if (gain < -1e-9) {
            throw std::logic_error("information_gain: negative gain beyond rounding noise");
        }
        gain = 0.0;
    }
    return std::min(gain, h_parent);
}

std::vector<SplitCandidate> enumerate_candidates(const SampleView& view,
                                                 MulticlassStrategy strategy) {
    const auto counts = view.label_counts();
    std::vector<int> present;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) present.push_back(int(c));
    }
    if (present.size() < 2) {
        throw std::invalid_argument("enumerate_candidates: fewer than two labels present");
    }

    std::vector<SplitCandidate> candidates;
    if (present.size() == 2) {
        // Either strategy reduces to the single pairwise problem; the first
        // label present is '+'.
        candidates.push_back({present[0], present[1], false});
        return candidates;
    }
    if (strategy == MulticlassStrategy::one_vs_one) {
        for (std::size_t a = 0; a < present.size(); ++a) {
            for (std::size_t b = a + 1; b < present.size(); ++b) {
                candidates.push_back({present[a], present[b], false});
            }
        }
    } else {
        for (const int label : present) {
            candidates.push_back({label, -1, true});
        }
    }
    return candidates;
}

CandidateResult evaluate_candidate(const SampleView& view, const SplitCandidate& candidate,
                                   std::size_t candidate_index, const SvmParams& svm_params,
                                   std::span<const std::size_t> feature_subset) {
    const std::size_t t = view.size();
    const Matrix all_rows = gather(view, feature_subset);

    // Training subset: the two classes for a pairwise candidate, every row
    // for one-vs-rest.
    Matrix train;
    std::vector<int> y;
    if (candidate.rest) {
        train = all_rows;
        y.resize(t);
        for (std::size_t i = 0; i < t; ++i) {
            y[i] = view.label(i) == candidate.pos_label ? 1 : -1;
        }
    } else {
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < t; ++i) {
            const int label = view.label(i);
            if (label == candidate.pos_label || label == candidate.neg_label) {
                keep.push_back(i);
            }
        }
        train = Matrix(keep.size(), all_rows.cols);
        y.resize(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto src = all_rows.row(keep[i]);
            std::copy(src.begin(), src.end(), train.row(i).begin());
            y[i] = view.label(keep[i]) == candidate.pos_label ? 1 : -1;
        }
    }

    CandidateResult result;
    result.model = svm_params.kernel.kind == KernelKind::linear
                       ? train_linear_svm(train, y, svm_params)
                       : train_kernel_svm(train, y, svm_params);

    // The trained model partitions the FULL view, other-class rows included.
    std::vector<int> parent_labels(t), pos_labels, neg_labels;
    for (std::size_t i = 0; i < t; ++i) {
        parent_labels[i] = view.label(i);
        if (result.model.decision_value(all_rows.row(i)) >= 0.0) {
            result.pos.push_back(i);
            pos_labels.push_back(parent_labels[i]);
        } else {
            result.neg.push_back(i);
            neg_labels.push_back(parent_labels[i]);
        }
    }

    result.score.index = candidate_index;
    result.score.ig = information_gain(parent_labels, pos_labels, neg_labels);
    result.score.pos_size = result.pos.size();
    result.score.neg_size = result.neg.size();
    return result;
}

std::size_t select_split(std::span<const CandidateScore> scores, Splitter splitter,
                         Rng& rng) {
    if (scores.empty()) {
        throw std::invalid_argument("select_split: no candidates");
    }
    if (splitter == Splitter::random) {
        std::vector<std::size_t> positive;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (scores[j].ig > 0.0) positive.push_back(j);
        }
        if (!positive.empty()) {
            return positive[std::size_t(rng.below(positive.size()))];
        }
        // No positive gain anywhere: fall back to the argmax rule.
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
        if (scores[j].ig > scores[best].ig) best = j;
    }
    return best;
}

Tree build_tree(const SampleView& view, const StreeParams& params) {
    if (view.size() == 0) {
        throw std::invalid_argument("build_tree: empty view");
    }
    if (params.min_samples_split < 2) {
        throw std::invalid_argument("build_tree: min_samples_split must be at least 2");
    }
    Builder builder(view, params);
    std::vector<std::size_t> all(view.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    Tree tree;
    tree.root = builder.grow(all, 0);
    tree.stats = builder.stats;
    return tree;
}

int predict_tree(const TreeNode& root, std::span<const double> x) {
    const TreeNode* node = &root;
    std::vector<double> scratch;
    while (!node->is_leaf()) {
        double value;
        if (node->feature_subset.empty()) {
            value = node->model->decision_value(x);
        } else {
            scratch.resize(node->feature_subset.size());
            for (std::size_t c = 0; c < node->feature_subset.size(); ++c) {
                if (node->feature_subset[c] >= x.size()) {
                    throw std::invalid_argument("predict_tree: dimension mismatch");
                }
                scratch[c] = x[node->feature_subset[c]];
            }
            value = node->model->decision_value(scratch);
        }
        node = value >= 0.0 ? node->positive.get() : node->negative.get();
    }
    return node->label;
}

std::size_t node_count(const TreeNode& root) {
    if (root.is_leaf()) return 1;
    return 1 + node_count(*root.positive) + node_count(*root.negative);
}

std::size_t tree_depth(const TreeNode& root) {
    if (root.is_leaf()) return 0;
    return 1 + std::max(tree_depth(*root.positive), tree_depth(*root.negative));
}

}  // namespace odte
