#include "vidmeta/decision_tree.h"

#include "vidmeta/error.h"
#include "vidmeta/json_matrix.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vidmeta {
namespace {

    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = std::numeric_limits<double>::infinity();
    };

    // Sum over both sides of n_side * gini(side); lower is better.
    double weighted_gini(const std::vector<std::int64_t>& left, std::int64_t n_left,
                         const std::vector<std::int64_t>& total, std::int64_t n)
    {
        double sq_left = 0.0;
        double sq_right = 0.0;
        for (std::size_t c = 0; c < total.size(); ++c) {
            const double l = static_cast<double>(left[c]);
            const double r = static_cast<double>(total[c] - left[c]);
            sq_left += l * l;
            sq_right += r * r;
        }
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n - n_left);
        return (nl - sq_left / nl) + (nr - sq_right / nr);
    }

    Split best_split(const Eigen::MatrixXd& x, const std::vector<int>& cls, std::size_t n_classes,
                     const std::vector<Eigen::Index>& rows)
    {
        const auto n = static_cast<std::int64_t>(rows.size());
        std::vector<std::int64_t> total(n_classes, 0);
        for (Eigen::Index r : rows) {
            ++total[static_cast<std::size_t>(cls[static_cast<std::size_t>(r)])];
        }
        Split best;
        std::vector<std::pair<double, int>> col(rows.size());
        std::vector<std::int64_t> left(n_classes);
        for (Eigen::Index f = 0; f < x.cols(); ++f) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                col[i] = {x(rows[i], f), cls[static_cast<std::size_t>(rows[i])]};
            }
            std::sort(col.begin(), col.end());
            if (col.front().first == col.back().first) {
                continue;
            }
            std::fill(left.begin(), left.end(), 0);
            for (std::size_t i = 0; i + 1 < col.size(); ++i) {
                ++left[static_cast<std::size_t>(col[i].second)];
                const double a = col[i].first;
                const double b = col[i + 1].first;
                if (a == b) {
                    continue;
                }
                const double score
                    = weighted_gini(left, static_cast<std::int64_t>(i + 1), total, n);
                if (score < best.score - 1e-9) {
                    double t = a + (b - a) / 2.0;
                    if (!(t >= a && t < b)) {
                        t = a;
                    }
                    best = {static_cast<int>(f), t, score};
                }
            }
        }
        return best;
    }

}  // namespace

int TreeModel::depth() const
{
    if (nodes.empty()) {
        return 0;
    }
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const TreeNode& node = nodes[static_cast<std::size_t>(i)];
        if (node.feature >= 0) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return deepest;
}

std::size_t TreeModel::leaf_count() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

TreeModel tree_fit(const Eigen::MatrixXd& x, const std::vector<std::string>& y)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "sample and label counts differ");
    }
    if (y.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "tree needs at least one sample");
    }
    std::vector<std::string> classes;
    std::vector<int> cls(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto it = std::find(classes.begin(), classes.end(), y[i]);
        if (it == classes.end()) {
            classes.push_back(y[i]);
            it = classes.end() - 1;
        }
        cls[i] = static_cast<int>(it - classes.begin());
    }

    TreeModel model;
    model.input_dim = static_cast<std::size_t>(x.cols());
    model.nodes.emplace_back();
    std::vector<Eigen::Index> all(y.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = static_cast<Eigen::Index>(i);
    }
    std::vector<std::pair<int, std::vector<Eigen::Index>>> stack;
    stack.emplace_back(0, std::move(all));
    while (!stack.empty()) {
        auto [id, rows] = std::move(stack.back());
        stack.pop_back();

        std::vector<std::int64_t> counts(classes.size(), 0);
        for (Eigen::Index r : rows) {
            ++counts[static_cast<std::size_t>(cls[static_cast<std::size_t>(r)])];
        }
        const auto majority = static_cast<std::size_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        const bool pure = counts[majority] == static_cast<std::int64_t>(rows.size());
        const Split split = pure ? Split{} : best_split(x, cls, classes.size(), rows);
        if (split.feature < 0) {
            model.nodes[static_cast<std::size_t>(id)].label = classes[majority];
            continue;
        }

        std::vector<Eigen::Index> lo;
        std::vector<Eigen::Index> hi;
        for (Eigen::Index r : rows) {
            (x(r, split.feature) <= split.threshold ? lo : hi).push_back(r);
        }
        const int left = static_cast<int>(model.nodes.size());
        model.nodes.emplace_back();
        model.nodes.emplace_back();
        TreeNode& node = model.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = left + 1;
        stack.emplace_back(left + 1, std::move(hi));
        stack.emplace_back(left, std::move(lo));
    }
    return model;
}

std::string tree_predict(const TreeModel& model, const Eigen::RowVectorXd& x)
{
    if (model.nodes.empty()) {
        throw Error(ErrorCode::kEmptyModel, "tree has no nodes");
    }
    if (static_cast<std::size_t>(x.size()) != model.input_dim) {
        throw Error(ErrorCode::kDimensionMismatch, "sample dimensionality differs from tree");
    }
    std::size_t i = 0;
    while (model.nodes[i].feature >= 0) {
        const TreeNode& n = model.nodes[i];
        i = static_cast<std::size_t>(x(n.feature) <= n.threshold ? n.left : n.right);
    }
    return model.nodes[i].label;
}

std::vector<std::string> tree_predict(const TreeModel& model, const Eigen::MatrixXd& x)
{
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        out.push_back(tree_predict(model, Eigen::RowVectorXd(x.row(r))));
    }
    return out;
}

nlohmann::json TreeModel::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const TreeNode& n : nodes) {
        if (n.feature < 0) {
            arr.push_back({{"label", n.label}});
        } else {
            arr.push_back({{"feature", n.feature},
                           {"threshold", format_double(n.threshold)},
                           {"left", n.left},
                           {"right", n.right}});
        }
    }
    return {{"input_dim", input_dim}, {"nodes", arr}};
}

TreeModel TreeModel::from_json(const nlohmann::json& j)
{
    TreeModel m;
    try {
        m.input_dim = j.at("input_dim").get<std::size_t>();
        for (const auto& e : j.at("nodes")) {
            TreeNode n;
            if (e.contains("label")) {
                n.label = e.at("label").get<std::string>();
            } else {
                n.feature = e.at("feature").get<int>();
                n.threshold = parse_double(e.at("threshold").get<std::string>());
                n.left = e.at("left").get<int>();
                n.right = e.at("right").get<int>();
            }
            m.nodes.push_back(std::move(n));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("tree JSON: ") + e.what());
    }
    const auto count = static_cast<int>(m.nodes.size());
    for (const TreeNode& n : m.nodes) {
        if (n.feature >= 0
            && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count
                || static_cast<std::size_t>(n.feature) >= m.input_dim)) {
            throw Error(ErrorCode::kInvalidArgument, "tree JSON: node reference out of range");
        }
    }
    return m;
}

}  // namespace vidmeta
