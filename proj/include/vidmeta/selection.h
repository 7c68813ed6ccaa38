#pragma once

// Redundancy reduction over feature vectors: positive correlations form an
// affinity graph, spectral clustering groups correlated features, and large
// groups are collapsed to a single randomly chosen representative.

#include "vidmeta/vocabulary.h"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace vidmeta {

// Samples as rows.
Eigen::MatrixXd to_matrix(std::span<const FeatureVector> vectors);

// Pearson correlation between columns of `samples` (rows are samples).
// Constant columns correlate 0 with everything else and 1 with themselves.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples);
Eigen::MatrixXd correlation_matrix(std::span<const FeatureVector> vectors);

Eigen::MatrixXd clamp_positive(const Eigen::MatrixXd& r);

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 300;
};

// Seeded k-means++ with restarts; returns 0-based assignments of the rows of
// `points`, relabelled in order of first appearance.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        const KMeansOptions& options = {});

// Normalized-cut spectral clustering of a symmetric affinity matrix with
// entries in [0, 1]; the diagonal is ignored. Features with no affinity to any
// other feature become singleton clusters and the remaining features are
// split into (alpha - singletons) clusters, at least one. Labels start at 1.
// alpha == 1 puts everything in one cluster.
std::vector<int> spectral_cluster(const Eigen::MatrixXd& affinity, int alpha,
                                  std::uint64_t seed, const KMeansOptions& options = {});

enum class SmallClusterPolicy { kKeepAll, kDrop };

struct SelectionMask {
    std::vector<std::size_t> retained;  // sorted feature positions
    std::vector<int> cluster_labels;    // per feature
    std::uint64_t seed = 0;
    int alpha = 0;
    int beta = 0;
    SmallClusterPolicy small_clusters = SmallClusterPolicy::kKeepAll;

    nlohmann::json to_json() const;
    static SelectionMask from_json(const nlohmann::json& j);
};

// Clusters with more than `beta` members keep one member drawn with `seed`.
// Smaller clusters are kept whole (or dropped under kDrop).
SelectionMask select_features(std::span<const int> labels, int beta, std::uint64_t seed,
                              SmallClusterPolicy policy = SmallClusterPolicy::kKeepAll);

// Columns of `samples` listed in `mask.retained`.
Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& samples, const SelectionMask& mask);

}  // namespace vidmeta
