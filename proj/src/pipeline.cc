#include "vidmeta/pipeline.h"

#include "vidmeta/error.h"

#include <algorithm>
#include <set>

namespace vidmeta {
namespace {

    constexpr std::uint64_t kClusterSeedOffset = 1;
    constexpr std::uint64_t kSelectionSeedOffset = 2;

    Eigen::MatrixXd vectorize_all(const Vocabulary& vocab, const std::vector<StringSet>& samples)
    {
        std::vector<FeatureVector> vectors;
        vectors.reserve(samples.size());
        for (const StringSet& s : samples) {
            vectors.push_back(vectorize(s, vocab));
        }
        Eigen::MatrixXd m = to_matrix(vectors);
        if (vectors.empty()) {
            m.resize(0, static_cast<Eigen::Index>(vocab.dim()));
        }
        return m;
    }

    std::string hex64(std::uint64_t v)
    {
        static const char* digits = "0123456789abcdef";
        std::string s(16, '0');
        for (int i = 15; i >= 0; --i) {
            s[static_cast<std::size_t>(i)] = digits[v & 0xF];
            v >>= 4;
        }
        return s;
    }

}  // namespace

std::string classifier_name(ClassifierKind kind)
{
    switch (kind) {
    case ClassifierKind::kAuto: return "auto";
    case ClassifierKind::kLdaKnn: return "lda-knn";
    case ClassifierKind::kTree: return "tree";
    }
    return "auto";
}

ClassifierKind parse_classifier(const std::string& name)
{
    if (name == "auto") return ClassifierKind::kAuto;
    if (name == "lda-knn") return ClassifierKind::kLdaKnn;
    if (name == "tree") return ClassifierKind::kTree;
    throw Error(ErrorCode::kInvalidArgument, "unknown classifier: " + name);
}

PipelineModel fit_pipeline(const std::vector<StringSet>& samples,
                           const std::vector<std::string>& labels,
                           const PipelineOptions& options)
{
    if (samples.size() != labels.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "sample and label counts differ");
    }
    const std::set<std::string> classes(labels.begin(), labels.end());
    if (classes.size() < 2) {
        throw Error(ErrorCode::kDegenerateLabels, "training data needs at least two classes");
    }
    if (options.alpha < 1 || options.beta < 1 || options.lambda < 1) {
        throw Error(ErrorCode::kInvalidArgument, "alpha, beta and lambda must be positive");
    }

    PipelineModel model;
    model.lambda = options.lambda;
    model.vocabulary = build_vocabulary(samples, options.continuous);
    const auto dim = static_cast<int>(model.vocabulary.dim());
    if (dim == 0) {
        throw Error(ErrorCode::kDegenerateAffinity, "training data yields an empty vocabulary");
    }
    const Eigen::MatrixXd x = vectorize_all(model.vocabulary, samples);

    const int alpha = std::min(options.alpha, dim);
    const Eigen::MatrixXd affinity = clamp_positive(correlation_matrix(x));
    const std::vector<int> clusters
        = spectral_cluster(affinity, alpha, options.seed + kClusterSeedOffset);
    model.mask = select_features(clusters, options.beta, options.seed + kSelectionSeedOffset,
                                 options.small_clusters);
    model.mask.alpha = alpha;
    if (model.mask.retained.empty()) {
        throw Error(ErrorCode::kDegenerateAffinity, "feature selection retained nothing");
    }
    const Eigen::MatrixXd xs = apply_mask(x, model.mask);

    model.classifier = options.classifier;
    if (model.classifier == ClassifierKind::kAuto) {
        model.classifier = classes.size() == 2 ? ClassifierKind::kTree : ClassifierKind::kLdaKnn;
    }
    if (model.classifier == ClassifierKind::kLdaKnn) {
        model.lda = lda_fit(xs, labels, LdaOptions{options.ridge_scale});
        model.knn = knn_fit(lda_transform(*model.lda, xs), labels, options.lambda,
                            options.knn_weighting, options.knn_metric);
    } else {
        model.tree = tree_fit(xs, labels);
    }
    return model;
}

Eigen::MatrixXd pipeline_features(const PipelineModel& model,
                                  const std::vector<StringSet>& samples)
{
    return apply_mask(vectorize_all(model.vocabulary, samples), model.mask);
}

Eigen::MatrixXd pipeline_project(const PipelineModel& model,
                                 const std::vector<StringSet>& samples)
{
    if (!model.lda) {
        throw Error(ErrorCode::kEmptyModel, "model has no 2D projection");
    }
    return lda_transform(*model.lda, pipeline_features(model, samples));
}

std::vector<std::string> pipeline_predict(const PipelineModel& model,
                                          const std::vector<StringSet>& samples)
{
    if (model.knn) {
        return knn_predict(*model.knn, pipeline_project(model, samples));
    }
    if (model.tree) {
        return tree_predict(*model.tree, pipeline_features(model, samples));
    }
    throw Error(ErrorCode::kEmptyModel, "model has no classifier");
}

nlohmann::json PipelineModel::to_json() const
{
    nlohmann::json j = {
        {"format", "vidmeta-model"},
        {"version", 1},
        {"vocabulary_hash", hex64(vocabulary.hash())},
        {"vocabulary", vocabulary.to_json()},
        {"selection", mask.to_json()},
        {"hyperparameters",
         {{"alpha", mask.alpha}, {"beta", mask.beta}, {"lambda", lambda}, {"seed", mask.seed}}},
        {"classifier", classifier_name(classifier)},
    };
    if (lda) {
        j["lda"] = lda->to_json();
    }
    if (knn) {
        j["knn"] = knn->to_json();
    }
    if (tree) {
        j["tree"] = tree->to_json();
    }
    return j;
}

PipelineModel PipelineModel::from_json(const nlohmann::json& j)
{
    PipelineModel m;
    try {
        if (j.at("format").get<std::string>() != "vidmeta-model") {
            throw Error(ErrorCode::kInvalidArgument, "not a model document");
        }
        m.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
        if (j.at("vocabulary_hash").get<std::string>() != hex64(m.vocabulary.hash())) {
            throw Error(ErrorCode::kInvalidArgument, "vocabulary hash mismatch");
        }
        m.mask = SelectionMask::from_json(j.at("selection"));
        m.lambda = j.at("hyperparameters").at("lambda").get<int>();
        m.classifier = parse_classifier(j.at("classifier").get<std::string>());
        if (j.contains("lda")) {
            m.lda = LdaModel::from_json(j.at("lda"));
        }
        if (j.contains("knn")) {
            m.knn = KnnModel::from_json(j.at("knn"));
        }
        if (j.contains("tree")) {
            m.tree = TreeModel::from_json(j.at("tree"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("model JSON: ") + e.what());
    }
    for (std::size_t r : m.mask.retained) {
        if (r >= m.vocabulary.dim()) {
            throw Error(ErrorCode::kInvalidArgument, "model JSON: mask exceeds vocabulary");
        }
    }
    return m;
}

}  // namespace vidmeta
