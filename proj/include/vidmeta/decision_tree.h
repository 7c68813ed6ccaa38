#pragma once

// CART classifier: Gini impurity, no depth limit, thresholds at midpoints.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;     // taken when x[feature] <= threshold
    int right = -1;
    std::string label;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t input_dim = 0;

    int depth() const;
    std::size_t leaf_count() const;

    nlohmann::json to_json() const;
    static TreeModel from_json(const nlohmann::json& j);
};

// Impure nodes are split whenever some feature takes two distinct values,
// even when no split lowers the impurity. Among equal splits the lowest
// feature index and then the lowest threshold wins. Leaves predict the
// majority label, ties going to the label seen first in `y`.
TreeModel tree_fit(const Eigen::MatrixXd& x, const std::vector<std::string>& y);

std::string tree_predict(const TreeModel& model, const Eigen::RowVectorXd& x);
std::vector<std::string> tree_predict(const TreeModel& model, const Eigen::MatrixXd& x);

}  // namespace vidmeta
