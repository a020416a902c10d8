#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "helpers.hpp"
#include "odte/ensemble.hpp"
#include "odte/serialize.hpp"
#include "odte/stree.hpp"

using namespace odte;

namespace {

StreeParams separable_params() {
    StreeParams params;
    params.svm.C = 1e6;
    params.splitter = Splitter::best;
    return params;
}

std::size_t internal_count(const TreeNode& node) {
    if (node.is_leaf()) return 0;
    return 1 + internal_count(*node.positive) + internal_count(*node.negative);
}

std::size_t leaf_count_total(const TreeNode& node) {
    if (node.is_leaf()) {
        std::size_t total = 0;
        for (auto c : node.counts) total += c;
        return total;
    }
    return leaf_count_total(*node.positive) + leaf_count_total(*node.negative);
}

std::string tree_fingerprint(Tree tree, const Dataset& ds) {
    Ensemble e;
    e.trees.push_back(std::move(tree));
    e.vocabulary = ds.vocabulary();
    e.params.n_trees = 1;
    e.per_tree_seeds = {0};
    return ensemble_to_json(e).dump();
}

}  // namespace

TEST_CASE("shannon entropy matches hand values") {
    CHECK(shannon_entropy(std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(shannon_entropy(std::vector<int>{0, 0, 0}) == 0.0);
    CHECK(shannon_entropy(std::vector<int>{0, 0, 1}) ==
          doctest::Approx(0.9182958340544896).epsilon(1e-12));
    // Uniform over 4 classes: 2 bits.
    CHECK(shannon_entropy(std::vector<int>{0, 1, 2, 3}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(shannon_entropy(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("information gain matches hand values") {
    const std::vector<int> parent{0, 0, 1, 1};
    CHECK(information_gain(parent, std::vector<int>{0, 0}, std::vector<int>{1, 1}) == 1.0);
    CHECK(information_gain(parent, std::vector<int>{0, 1}, std::vector<int>{0, 1}) == 0.0);
    const std::vector<int> three{0, 0, 1};
    CHECK(information_gain(three, std::vector<int>{0, 0}, std::vector<int>{1}) ==
          doctest::Approx(0.9182958340544896).epsilon(1e-12));
    // All rows to one side: no information.
    CHECK(information_gain(three, three, std::vector<int>{}) == 0.0);
    CHECK_THROWS_AS(
        information_gain(parent, std::vector<int>{0, 0}, std::vector<int>{1, 2}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        information_gain(parent, std::vector<int>{0, 0, 1, 1}, std::vector<int>{1}),
        std::invalid_argument);
}

TEST_CASE("information gain is bounded by parent entropy on random partitions") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t size = 2 + rng.below(30);
        const std::size_t k = 2 + rng.below(4);
        std::vector<int> parent(size);
        for (auto& v : parent) v = int(rng.below(k));
        std::vector<int> pos, neg;
        for (int v : parent) (rng.below(2) == 0 ? pos : neg).push_back(v);
        const double h = shannon_entropy(parent);
        const double ig = information_gain(parent, pos, neg);
        CHECK(ig >= 0.0);
        CHECK(ig <= h + 1e-12);
    }
}

TEST_CASE("candidate enumeration follows the multiclass strategy") {
    const auto ds4 = testutil::make_dataset({{0}, {1}, {2}, {3}},
                                            {"a", "b", "c", "d"});
    SampleView all4(ds4);
    const auto ovo = enumerate_candidates(all4, MulticlassStrategy::one_vs_one);
    REQUIRE(ovo.size() == 6);
    CHECK(ovo[0].pos_label == 0);
    CHECK(ovo[0].neg_label == 1);
    CHECK(ovo[1].pos_label == 0);
    CHECK(ovo[1].neg_label == 2);
    CHECK(ovo[2].pos_label == 0);
    CHECK(ovo[2].neg_label == 3);
    CHECK(ovo[3].pos_label == 1);
    CHECK(ovo[3].neg_label == 2);
    CHECK(ovo[4].pos_label == 1);
    CHECK(ovo[4].neg_label == 3);
    CHECK(ovo[5].pos_label == 2);
    CHECK(ovo[5].neg_label == 3);
    for (const auto& c : ovo) CHECK_FALSE(c.rest);

    const auto ovr = enumerate_candidates(all4, MulticlassStrategy::one_vs_rest);
    REQUIRE(ovr.size() == 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(ovr[j].pos_label == j);
        CHECK(ovr[j].neg_label == -1);
        CHECK(ovr[j].rest);
    }
}

TEST_CASE("only labels present in the view are enumerated") {
    const auto ds = testutil::make_dataset({{0}, {1}, {2}, {3}},
                                           {"a", "b", "c", "d"});
    SampleView partial(ds, {0, 2, 3});  // labels {0, 2, 3}
    const auto ovo = enumerate_candidates(partial, MulticlassStrategy::one_vs_one);
    REQUIRE(ovo.size() == 3);
    CHECK(ovo[0].pos_label == 0);
    CHECK(ovo[0].neg_label == 2);
    CHECK(ovo[1].pos_label == 0);
    CHECK(ovo[1].neg_label == 3);
    CHECK(ovo[2].pos_label == 2);
    CHECK(ovo[2].neg_label == 3);
}

TEST_CASE("two present labels yield one candidate under either strategy") {
    const auto ds = testutil::make_dataset({{0}, {1}, {2}}, {"x", "y", "x"});
    SampleView all(ds);
    for (auto strategy : {MulticlassStrategy::one_vs_one, MulticlassStrategy::one_vs_rest}) {
        const auto candidates = enumerate_candidates(all, strategy);
        REQUIRE(candidates.size() == 1);
        CHECK(candidates[0].pos_label == 0);
        CHECK(candidates[0].neg_label == 1);
        CHECK_FALSE(candidates[0].rest);
    }
}

TEST_CASE("enumeration requires at least two present labels") {
    const auto ds = testutil::make_dataset({{0}, {1}}, {"only", "only"});
    CHECK_THROWS_AS(enumerate_candidates(SampleView(ds), MulticlassStrategy::one_vs_one),
                    std::invalid_argument);
}

TEST_CASE("evaluate_candidate partitions the full view") {
    // Three well-separated classes on a line; the one-vs-one (a, b) SVM still
    // routes every class-c row somewhere.
    const auto ds = testutil::make_dataset(
        {{0.0}, {0.1}, {1.0}, {1.1}, {5.0}, {5.1}},
        {"a", "a", "b", "b", "c", "c"});
    SampleView all(ds);
    SvmParams svm;
    svm.C = 1e6;
    const auto result = evaluate_candidate(all, {.pos_label = 0, .neg_label = 1}, 0, svm);
    CHECK(result.pos.size() + result.neg.size() == all.size());
    CHECK(result.score.pos_size == result.pos.size());
    CHECK(result.score.neg_size == result.neg.size());
    CHECK(result.score.ig > 0.0);
    CHECK(result.score.index == 0);
}

TEST_CASE("separable binary candidate achieves the full parent entropy") {
    const auto ds = testutil::make_dataset({{0.0}, {0.2}, {3.0}, {3.2}},
                                           {"n", "n", "p", "p"});
    SampleView all(ds);
    SvmParams svm;
    svm.C = 1e6;
    const auto result = evaluate_candidate(all, {.pos_label = 0, .neg_label = 1}, 0, svm);
    CHECK(result.score.ig == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("select_split best takes the argmax with lowest-index ties") {
    Rng rng(1);
    std::vector<CandidateScore> scores{{0, 0.2, 0, 0}, {1, 0.9, 0, 0}, {2, 0.9, 0, 0}};
    CHECK(select_split(scores, Splitter::best, rng) == 1);
    std::vector<CandidateScore> single{{0, 0.0, 0, 0}};
    CHECK(select_split(single, Splitter::best, rng) == 0);
}

TEST_CASE("select_split random picks only positive-gain candidates") {
    std::vector<CandidateScore> scores{{0, 0.0, 0, 0}, {1, 0.5, 0, 0}, {2, 0.0, 0, 0},
                                       {3, 0.7, 0, 0}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto chosen = select_split(scores, Splitter::random, rng);
        CHECK((chosen == 1 || chosen == 3));
    }
    bool saw1 = false, saw3 = false;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const auto chosen = select_split(scores, Splitter::random, rng);
        saw1 = saw1 || chosen == 1;
        saw3 = saw3 || chosen == 3;
    }
    CHECK(saw1);
    CHECK(saw3);
}

TEST_CASE("select_split random falls back to best when no gain is positive") {
    std::vector<CandidateScore> scores{{0, 0.0, 0, 0}, {1, 0.0, 0, 0}};
    Rng rng(33);
    CHECK(select_split(scores, Splitter::random, rng) == 0);
}

TEST_CASE("pure nodes become leaves without training") {
    const auto ds = testutil::make_dataset({{1}, {2}, {3}}, {"same", "same", "same"});
    const auto tree = build_tree(SampleView(ds), separable_params());
    REQUIRE(tree.root->is_leaf());
    CHECK(tree.root->label == 0);
    CHECK(tree.root->counts == std::vector<std::size_t>{3});
    CHECK(tree.stats.svm_trainings == 0);
    CHECK(node_count(*tree.root) == 1);
    CHECK(tree_depth(*tree.root) == 0);
}

TEST_CASE("separable binary data grows a three-node tree with perfect training accuracy") {
    const auto ds = testutil::make_dataset({{0.0}, {0.3}, {4.0}, {4.3}},
                                           {"lo", "lo", "hi", "hi"});
    const auto tree = build_tree(SampleView(ds), separable_params());
    CHECK(node_count(*tree.root) == 3);
    CHECK(tree.stats.svm_trainings == 1);
    CHECK(tree.root->node_ig == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        CHECK(predict_tree(*tree.root, ds.row(r)) == ds.label(r));
    }
}

TEST_CASE("max_depth zero forces a leaf with the mode label") {
    const auto ds = testutil::make_dataset({{0}, {1}, {2}}, {"a", "b", "b"});
    auto params = separable_params();
    params.max_depth = 0;
    const auto tree = build_tree(SampleView(ds), params);
    REQUIRE(tree.root->is_leaf());
    CHECK(tree.root->label == 1);
    CHECK(tree.root->counts == std::vector<std::size_t>{1, 2});
}

TEST_CASE("leaf mode ties resolve to the lowest vocabulary index") {
    const auto ds = testutil::make_dataset({{0}, {1}, {2}, {3}}, {"z", "z", "a", "a"});
    auto params = separable_params();
    params.max_depth = 0;
    const auto tree = build_tree(SampleView(ds), params);
    REQUIRE(tree.root->is_leaf());
    CHECK(tree.root->label == 0);  // "z" appeared first, so it has index 0
}

TEST_CASE("min_samples_split stops growth on small nodes") {
    const auto ds = testutil::make_dataset({{0.0}, {5.0}, {9.0}}, {"a", "b", "a"});
    auto params = separable_params();
    params.min_samples_split = 4;
    const auto tree = build_tree(SampleView(ds), params);
    CHECK(tree.root->is_leaf());
}

TEST_CASE("min_purity below one accepts slightly impure leaves") {
    const auto ds = testutil::make_dataset(
        {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}},
        {"a", "a", "a", "a", "a", "a", "a", "a", "a", "b"});
    auto params = separable_params();
    params.min_purity = 0.9;
    const auto tree = build_tree(SampleView(ds), params);
    REQUIRE(tree.root->is_leaf());
    CHECK(tree.root->label == 0);
}

TEST_CASE("hand-built tree routes zero decision values to the positive side") {
    TreeNode root;
    root.model = std::make_unique<SvmModel>(SvmModel::linear({1.0}, -1.0));
    root.positive = std::make_unique<TreeNode>();
    root.positive->label = 1;
    root.negative = std::make_unique<TreeNode>();
    root.negative->label = 0;
    CHECK(predict_tree(root, std::vector<double>{0.0}) == 0);  // f = -1 < 0
    CHECK(predict_tree(root, std::vector<double>{1.0}) == 1);  // f = 0 routes '+'
    CHECK(predict_tree(root, std::vector<double>{2.0}) == 1);  // f = 1 > 0
}

TEST_CASE("three-class separable data is fully resolved") {
    const auto ds = testutil::make_dataset(
        {{0.0, 0.0}, {0.2, 0.1}, {5.0, 0.0}, {5.2, 0.1}, {0.0, 5.0}, {0.2, 5.1}},
        {"a", "a", "b", "b", "c", "c"});
    auto params = separable_params();
    const auto tree = build_tree(SampleView(ds), params);
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        CHECK(predict_tree(*tree.root, ds.row(r)) == ds.label(r));
    }
    CHECK(internal_count(*tree.root) >= 2);  // needs at least two splits for 3 classes
}

TEST_CASE("leaf counts across the tree conserve the training multiset") {
    const auto ds = testutil::random_blobs(60, 3, 3, 21);
    StreeParams params;
    params.seed = 4;
    const auto tree = build_tree(SampleView(ds), params);
    CHECK(leaf_count_total(*tree.root) == 60);
    CHECK(tree_depth(*tree.root) <= 60);
}

TEST_CASE("binary data trains exactly one SVM per split attempt") {
    const auto ds = testutil::random_blobs(40, 2, 2, 17);
    StreeParams params;
    params.seed = 9;
    const auto tree = build_tree(SampleView(ds), params);
    // Two labels collapse both strategies to a single candidate, so each node
    // that tries to split trains exactly one SVM (attempts can exceed the
    // internal count when a zero-gain candidate turns the node into a leaf).
    CHECK(tree.stats.svm_trainings == tree.stats.expansion_attempts);
    CHECK(tree.stats.expansion_attempts >= internal_count(*tree.root));
    CHECK(tree.stats.svm_trainings >= 1);
}

TEST_CASE("tree building is deterministic per seed") {
    const auto ds = testutil::random_blobs(50, 3, 3, 30);
    StreeParams params;
    params.splitter = Splitter::random;
    params.seed = 1234;
    auto a = build_tree(SampleView(ds), params);
    auto b = build_tree(SampleView(ds), params);
    CHECK(tree_fingerprint(std::move(a), ds) == tree_fingerprint(std::move(b), ds));
}

TEST_CASE("max_features restricts every node to one shared sorted subset") {
    const auto ds = testutil::random_blobs(40, 4, 2, 44);
    StreeParams params;
    params.max_features = 2;
    params.seed = 77;
    const auto tree = build_tree(SampleView(ds), params);
    std::vector<std::size_t> subset;
    std::function<void(const TreeNode&)> walk = [&](const TreeNode& node) {
        if (node.is_leaf()) return;
        REQUIRE(node.feature_subset.size() == 2);
        CHECK(node.feature_subset[0] < node.feature_subset[1]);
        CHECK(node.feature_subset[1] < 4);
        if (subset.empty()) subset = node.feature_subset;
        CHECK(node.feature_subset == subset);
        walk(*node.positive);
        walk(*node.negative);
    };
    walk(*tree.root);
    CHECK_FALSE(subset.empty());
    // Prediction only reads the selected columns, so full-width inputs work.
    (void)predict_tree(*tree.root, ds.row(0));
}

TEST_CASE("predictions reject inputs narrower than the used features") {
    const auto ds = testutil::make_dataset({{0.0, 1.0}, {4.0, 1.0}}, {"a", "b"});
    const auto tree = build_tree(SampleView(ds), separable_params());
    REQUIRE_FALSE(tree.root->is_leaf());
    CHECK_THROWS_AS(predict_tree(*tree.root, std::vector<double>{1.0}),
                    std::invalid_argument);
}
