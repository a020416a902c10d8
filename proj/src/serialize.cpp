#include "odte/serialize.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

namespace odte {
namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string strategy_name(MulticlassStrategy strategy) {
    return strategy == MulticlassStrategy::one_vs_one ? "ovo" : "ovr";
}

MulticlassStrategy strategy_from(const std::string& name) {
    if (name == "ovo") return MulticlassStrategy::one_vs_one;
    if (name == "ovr") return MulticlassStrategy::one_vs_rest;
    throw std::runtime_error("corrupted model file: unknown strategy '" + name + "'");
}

std::string splitter_name(Splitter splitter) {
    return splitter == Splitter::best ? "best" : "random";
}

Splitter splitter_from(const std::string& name) {
    if (name == "best") return Splitter::best;
    if (name == "random") return Splitter::random;
    throw std::runtime_error("corrupted model file: unknown splitter '" + name + "'");
}

std::string kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::polynomial: return "polynomial";
        case KernelKind::rbf: return "rbf";
    }
    throw std::logic_error("unknown kernel kind");
}

KernelKind kernel_from(const std::string& name) {
    if (name == "linear") return KernelKind::linear;
    if (name == "polynomial") return KernelKind::polynomial;
    if (name == "rbf") return KernelKind::rbf;
    throw std::runtime_error("corrupted model file: unknown kernel '" + name + "'");
}

json kernel_to_json(const KernelSpec& kernel) {
    return json{{"kind", kernel_name(kernel.kind)},
                {"gamma", kernel.gamma},
                {"degree", kernel.degree},
                {"coef0", kernel.coef0}};
}

KernelSpec kernel_spec_from_json(const json& payload) {
    KernelSpec kernel;
    kernel.kind = kernel_from(payload.at("kind").get<std::string>());
    kernel.gamma = payload.at("gamma").get<double>();
    kernel.degree = payload.at("degree").get<int>();
    kernel.coef0 = payload.at("coef0").get<double>();
    return kernel;
}

json model_to_json(const SvmModel& model) {
    if (model.is_linear()) {
        return json{{"kind", "linear"}, {"w", model.weights()}, {"b", model.bias()}};
    }
    json sv = json::array();
    for (std::size_t r = 0; r < model.support_rows().rows; ++r) {
        const auto row = model.support_rows().row(r);
        sv.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return json{{"kind", "kernel"},
                {"kernel", kernel_to_json(model.kernel())},
                {"sv", sv},
                {"alpha_y", model.alphas_signed()},
                {"b", model.bias()}};
}

SvmModel model_from_json(const json& payload) {
    const std::string kind = payload.at("kind").get<std::string>();
    if (kind == "linear") {
        return SvmModel::linear(payload.at("w").get<std::vector<double>>(),
                                payload.at("b").get<double>());
    }
    if (kind != "kernel") {
        throw std::runtime_error("corrupted model file: unknown model kind '" + kind + "'");
    }
    const auto& sv = payload.at("sv");
    const auto alpha_y = payload.at("alpha_y").get<std::vector<double>>();
    if (!sv.is_array() || sv.size() != alpha_y.size()) {
        throw std::runtime_error("corrupted model file: support vector shape mismatch");
    }
    std::size_t cols = 0;
    if (!sv.empty()) cols = sv.front().size();
    Matrix support(sv.size(), cols);
    for (std::size_t r = 0; r < sv.size(); ++r) {
        const auto row = sv[r].get<std::vector<double>>();
        if (row.size() != cols) {
            throw std::runtime_error("corrupted model file: ragged support vectors");
        }
        std::copy(row.begin(), row.end(), support.row(r).begin());
    }
    return SvmModel::kernelized(kernel_spec_from_json(payload.at("kernel")),
                                std::move(support), alpha_y,
                                payload.at("b").get<double>());
}

json node_to_json(const TreeNode& node) {
    if (node.is_leaf()) {
        return json{{"kind", "leaf"}, {"label", node.label}, {"counts", node.counts}};
    }
    // The in-memory convention keeps an empty subset for "all columns"; the
    // schema always spells the subset out.
    std::vector<std::size_t> subset = node.feature_subset;
    if (subset.empty()) {
        subset.resize(node.model->input_dimension());
        std::iota(subset.begin(), subset.end(), std::size_t{0});
    }
    return json{{"kind", "internal"},
                {"ig", node.node_ig},
                {"model", model_to_json(*node.model)},
                {"feature_subset", subset},
                {"pos", node_to_json(*node.positive)},
                {"neg", node_to_json(*node.negative)}};
}

std::unique_ptr<TreeNode> node_from_json(const json& payload, std::size_t depth,
                                         std::size_t n_classes) {
    auto node = std::make_unique<TreeNode>();
    node->depth = depth;
    const std::string kind = payload.at("kind").get<std::string>();
    if (kind == "leaf") {
        node->label = payload.at("label").get<int>();
        node->counts = payload.at("counts").get<std::vector<std::size_t>>();
        if (node->label < 0 || std::size_t(node->label) >= n_classes) {
            throw std::runtime_error("corrupted model file: leaf label outside vocabulary");
        }
        return node;
    }
    if (kind != "internal") {
        throw std::runtime_error("corrupted model file: unknown node kind '" + kind + "'");
    }
    node->node_ig = payload.at("ig").get<double>();
    node->model = std::make_unique<SvmModel>(model_from_json(payload.at("model")));
    // Keep the subset explicit: a model trained on a leading-column subset is
    // indistinguishable here from one trained on all columns of a narrower
    // dataset, so dropping "identity-looking" subsets would mis-route wider
    // inputs.  Projecting through an actual identity subset is a no-op.
    node->feature_subset = payload.at("feature_subset").get<std::vector<std::size_t>>();
    if (node->feature_subset.size() != node->model->input_dimension()) {
        throw std::runtime_error("corrupted model file: feature subset width mismatch");
    }
    node->positive = node_from_json(payload.at("pos"), depth + 1, n_classes);
    node->negative = node_from_json(payload.at("neg"), depth + 1, n_classes);
    return node;
}

json params_to_json(const OdteParams& params) {
    json max_depth;
    if (params.base.max_depth != kUnlimited) max_depth = params.base.max_depth;
    json base{{"svm",
               json{{"C", params.base.svm.C},
                    {"kernel", kernel_to_json(params.base.svm.kernel)},
                    {"max_iter", params.base.svm.max_iter},
                    {"tol", params.base.svm.tol},
                    {"seed", params.base.svm.seed}}},
              {"strategy", strategy_name(params.base.strategy)},
              {"max_depth", max_depth},
              {"min_samples_split", params.base.min_samples_split},
              {"splitter", splitter_name(params.base.splitter)},
              {"max_features", params.base.max_features},
              {"min_purity", params.base.min_purity},
              {"seed", params.base.seed}};
    return json{{"n_trees", params.n_trees},
                {"bootstrap_size", params.bootstrap_size},
                {"max_features", params.max_features},
                {"seed", params.seed},
                {"base", base}};
}

OdteParams params_from_json(const json& payload) {
    OdteParams params;
    params.n_trees = payload.at("n_trees").get<std::size_t>();
    params.bootstrap_size = payload.at("bootstrap_size").get<std::size_t>();
    params.max_features = payload.at("max_features").get<std::size_t>();
    params.seed = payload.at("seed").get<std::uint64_t>();
    const json& base = payload.at("base");
    const json& svm = base.at("svm");
    params.base.svm.C = svm.at("C").get<double>();
    params.base.svm.kernel = kernel_spec_from_json(svm.at("kernel"));
    params.base.svm.max_iter = svm.at("max_iter").get<std::size_t>();
    params.base.svm.tol = svm.at("tol").get<double>();
    params.base.svm.seed = svm.at("seed").get<std::uint64_t>();
    params.base.strategy = strategy_from(base.at("strategy").get<std::string>());
    params.base.max_depth =
        base.at("max_depth").is_null() ? kUnlimited : base.at("max_depth").get<std::size_t>();
    params.base.min_samples_split = base.at("min_samples_split").get<std::size_t>();
    params.base.splitter = splitter_from(base.at("splitter").get<std::string>());
    params.base.max_features = base.at("max_features").get<std::size_t>();
    params.base.min_purity = base.at("min_purity").get<double>();
    params.base.seed = base.at("seed").get<std::uint64_t>();
    return params;
}

}  // namespace

json ensemble_to_json(const Ensemble& ensemble) {
    json payload{{"schema_version", kSchemaVersion},
                 {"vocabulary", ensemble.vocabulary},
                 {"params", params_to_json(ensemble.params)},
                 {"trees", json::array()}};
    json per_tree_seeds = json::array();
    for (const auto seed : ensemble.per_tree_seeds) per_tree_seeds.push_back(seed);
    payload["params"]["per_tree_seeds"] = std::move(per_tree_seeds);
    for (const Tree& tree : ensemble.trees) {
        payload["trees"].push_back(node_to_json(*tree.root));
    }
    if (ensemble.scaler) {
        payload["scaler"] = json{{"mean", ensemble.scaler->mean()},
                                 {"stddev", ensemble.scaler->stddev()}};
    }
    return payload;
}

Ensemble ensemble_from_json(const json& payload) {
    try {
        const int version = payload.at("schema_version").get<int>();
        if (version != kSchemaVersion) {
            throw std::runtime_error("unsupported schema version " + std::to_string(version));
        }
        Ensemble ensemble;
        ensemble.schema_version = version;
        ensemble.vocabulary = payload.at("vocabulary").get<std::vector<std::string>>();
        ensemble.params = params_from_json(payload.at("params"));
        ensemble.per_tree_seeds =
            payload.at("params").at("per_tree_seeds").get<std::vector<std::uint64_t>>();
        for (const json& tree : payload.at("trees")) {
            Tree built;
            built.root = node_from_json(tree, 0, ensemble.vocabulary.size());
            ensemble.trees.push_back(std::move(built));
        }
        if (payload.contains("scaler")) {
            const json& scaler = payload.at("scaler");
            ensemble.scaler = StandardScaler(scaler.at("mean").get<std::vector<double>>(),
                                             scaler.at("stddev").get<std::vector<double>>());
        }
        return ensemble;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupted model file: ") + e.what());
    }
}

void save_model(const Ensemble& ensemble, const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open file for writing: " + path.string());
    }
    file << ensemble_to_json(ensemble).dump() << '\n';
    if (!file) {
        throw std::runtime_error("failed writing model file: " + path.string());
    }
}

Ensemble load_model(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open file: " + path.string());
    }
    json payload;
    try {
        payload = json::parse(file);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("corrupted model file: ") + e.what());
    }
    return ensemble_from_json(payload);
}

}  // namespace odte
