#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "odte/dataset.hpp"
#include "odte/random.hpp"
#include "odte/svm.hpp"

namespace odte {

enum class MulticlassStrategy { one_vs_one, one_vs_rest };
enum class Splitter { best, random };

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

struct StreeParams {
    SvmParams svm;
    MulticlassStrategy strategy = MulticlassStrategy::one_vs_one;
    std::size_t max_depth = kUnlimited;
    std::size_t min_samples_split = 2;
    Splitter splitter = Splitter::random;
    std::size_t max_features = 0;  // 0 = all features
    double min_purity = 1.0;       // leaf when max class proportion >= this
    std::uint64_t seed = 0;
};

// Shannon entropy in bits of a label-index multiset.
double shannon_entropy(std::span<const int> labels);

// Parent entropy minus size-weighted child entropies.  pos and neg must
// together form a permutation of parent (multiset equality) or an exception
// is thrown.  Result lies in [0, entropy(parent)].
double information_gain(std::span<const int> parent, std::span<const int> pos,
                        std::span<const int> neg);

// One candidate binary subproblem.  For one-vs-one, pos_label vs neg_label
// (trained on rows of those two classes only).  For one-vs-rest,
// neg_label == -1 and the SVM trains on every row with pos_label as '+'.
struct SplitCandidate {
    int pos_label = -1;
    int neg_label = -1;
    bool rest = false;
};

// Candidate subproblems for the labels present in a view, in vocabulary
// order: one-vs-one yields the k'(k'-1)/2 ordered pairs, one-vs-rest yields
// k' problems.  With exactly two labels present either strategy yields the
// single pairwise candidate.  Throws when fewer than two labels are present.
std::vector<SplitCandidate> enumerate_candidates(const SampleView& view,
                                                 MulticlassStrategy strategy);

struct CandidateScore {
    std::size_t index = 0;
    double ig = 0.0;
    std::size_t pos_size = 0;
    std::size_t neg_size = 0;
};

struct CandidateResult {
    SvmModel model;
    CandidateScore score;
    // Positions within the evaluated view; together they cover it exactly.
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
};

// Trains the candidate's SVM and partitions the FULL view by decision-value
// sign (>= 0 routes '+'), scoring the partition by information gain over all
// of the view's labels.  feature_subset, when non-empty, selects the columns
// the SVM sees.
CandidateResult evaluate_candidate(const SampleView& view, const SplitCandidate& candidate,
                                   std::size_t candidate_index, const SvmParams& svm_params,
                                   std::span<const std::size_t> feature_subset = {});

// Chooses the winning candidate: best -> argmax gain (ties -> lowest index);
// random -> uniform among candidates with positive gain, falling back to
// best when none are positive.
std::size_t select_split(std::span<const CandidateScore> scores, Splitter splitter,
                         Rng& rng);

struct TreeNode {
    // Internal when model is set; leaf otherwise.
    std::unique_ptr<SvmModel> model;
    std::vector<std::size_t> feature_subset;  // empty = identity (all columns)
    std::unique_ptr<TreeNode> positive;
    std::unique_ptr<TreeNode> negative;
    double node_ig = 0.0;
    std::size_t depth = 0;

    int label = -1;                   // leaf only
    std::vector<std::size_t> counts;  // leaf only: per-class sample counts

    bool is_leaf() const { return model == nullptr; }
};

struct TreeStats {
    std::size_t svm_trainings = 0;
    // Nodes that enumerated candidates (internal nodes plus nodes that tried
    // to split and became leaves on non-positive gain or an empty side).
    std::size_t expansion_attempts = 0;
};

struct Tree {
    std::unique_ptr<TreeNode> root;
    TreeStats stats;
};

// Grows one oblique tree: every internal node keeps the candidate SVM whose
// induced partition of the node sample maximizes information gain, recursing
// on the two sides.  Leaves appear on purity, depth/min-split limits, or when
// no candidate achieves positive gain.
Tree build_tree(const SampleView& view, const StreeParams& params);

// Routes x root-to-leaf by decision-value sign and returns the leaf label.
int predict_tree(const TreeNode& root, std::span<const double> x);

std::size_t node_count(const TreeNode& root);
std::size_t tree_depth(const TreeNode& root);  // deepest leaf depth, root = 0

}  // namespace odte
