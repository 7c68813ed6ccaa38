#pragma once

// Fitted chain from metadata strings to a label: vocabulary, selection
// mask and classifier, all fitted on training data only.

#include "vidmeta/decision_tree.h"
#include "vidmeta/knn.h"
#include "vidmeta/lda.h"
#include "vidmeta/selection.h"
#include "vidmeta/string_codec.h"
#include "vidmeta/vocabulary.h"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

enum class ClassifierKind { kAuto, kLdaKnn, kTree };

std::string classifier_name(ClassifierKind kind);
ClassifierKind parse_classifier(const std::string& name);

struct PipelineOptions {
    int alpha = 300;
    int beta = 4;
    int lambda = 5;
    std::uint64_t seed = 1;
    ClassifierKind classifier = ClassifierKind::kAuto;
    SmallClusterPolicy small_clusters = SmallClusterPolicy::kKeepAll;
    double ridge_scale = 1e-6;
    KnnWeighting knn_weighting = KnnWeighting::kInverse;
    KnnMetric knn_metric = KnnMetric::kEuclidean;
    ContinuousKeyList continuous = ContinuousKeyList::defaults();
};

struct PipelineModel {
    Vocabulary vocabulary;
    SelectionMask mask;
    ClassifierKind classifier = ClassifierKind::kTree;  // never kAuto once fitted
    std::optional<LdaModel> lda;
    std::optional<KnnModel> knn;
    std::optional<TreeModel> tree;
    int lambda = 5;

    bool has_projection() const { return lda.has_value(); }

    nlohmann::json to_json() const;
    static PipelineModel from_json(const nlohmann::json& j);
};

using StringSet = std::vector<MetadataString>;

// kAuto resolves to the tree for two classes and LDA + kNN otherwise. The
// effective alpha is capped at the vocabulary size.
PipelineModel fit_pipeline(const std::vector<StringSet>& samples,
                           const std::vector<std::string>& labels,
                           const PipelineOptions& options);

// Selected features, one row per sample.
Eigen::MatrixXd pipeline_features(const PipelineModel& model,
                                  const std::vector<StringSet>& samples);
// 2D embedding; requires an LDA model.
Eigen::MatrixXd pipeline_project(const PipelineModel& model,
                                 const std::vector<StringSet>& samples);
std::vector<std::string> pipeline_predict(const PipelineModel& model,
                                          const std::vector<StringSet>& samples);

}  // namespace vidmeta
