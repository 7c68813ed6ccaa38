#pragma once

// Distance-weighted nearest-neighbour voting.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

enum class KnnWeighting { kInverse, kInverseSquare, kUniform };
enum class KnnMetric { kEuclidean, kManhattan };

struct KnnModel {
    Eigen::MatrixXd points;            // one training sample per row
    std::vector<std::string> labels;
    std::vector<std::string> classes;  // order of first appearance in `labels`
    int lambda = 5;
    KnnWeighting weighting = KnnWeighting::kInverse;
    KnnMetric metric = KnnMetric::kEuclidean;

    nlohmann::json to_json() const;
    static KnnModel from_json(const nlohmann::json& j);
};

KnnModel knn_fit(const Eigen::MatrixXd& points, const std::vector<std::string>& labels,
                 int lambda = 5, KnnWeighting weighting = KnnWeighting::kInverse,
                 KnnMetric metric = KnnMetric::kEuclidean);

// The lambda nearest training points vote (distance ties go to the lower
// training index). Points at distance zero outvote everything else. Equal
// votes go to the class seen first in training order.
std::string knn_predict(const KnnModel& model, const Eigen::RowVectorXd& query);
std::vector<std::string> knn_predict(const KnnModel& model, const Eigen::MatrixXd& queries);

}  // namespace vidmeta
