#include "vidmeta/knn.h"

#include "vidmeta/error.h"
#include "vidmeta/json_matrix.h"

#include <algorithm>
#include <numeric>

namespace vidmeta {
namespace {

    const char* weighting_name(KnnWeighting w)
    {
        switch (w) {
        case KnnWeighting::kInverse: return "inverse";
        case KnnWeighting::kInverseSquare: return "inverse-square";
        case KnnWeighting::kUniform: return "uniform";
        }
        return "inverse";
    }

    KnnWeighting weighting_from(const std::string& s)
    {
        if (s == "inverse") return KnnWeighting::kInverse;
        if (s == "inverse-square") return KnnWeighting::kInverseSquare;
        if (s == "uniform") return KnnWeighting::kUniform;
        throw Error(ErrorCode::kInvalidArgument, "unknown kNN weighting: " + s);
    }

    double distance(const KnnModel& m, Eigen::Index row, const Eigen::RowVectorXd& q)
    {
        if (m.metric == KnnMetric::kManhattan) {
            return (m.points.row(row) - q).cwiseAbs().sum();
        }
        return (m.points.row(row) - q).norm();
    }

    std::size_t class_index(const KnnModel& m, const std::string& label)
    {
        return static_cast<std::size_t>(
            std::find(m.classes.begin(), m.classes.end(), label) - m.classes.begin());
    }

}  // namespace

KnnModel knn_fit(const Eigen::MatrixXd& points, const std::vector<std::string>& labels,
                 int lambda, KnnWeighting weighting, KnnMetric metric)
{
    if (static_cast<std::size_t>(points.rows()) != labels.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "point and label counts differ");
    }
    if (lambda < 1) {
        throw Error(ErrorCode::kInvalidArgument, "lambda must be at least 1");
    }
    KnnModel m;
    m.points = points;
    m.labels = labels;
    m.lambda = lambda;
    m.weighting = weighting;
    m.metric = metric;
    for (const std::string& l : labels) {
        if (std::find(m.classes.begin(), m.classes.end(), l) == m.classes.end()) {
            m.classes.push_back(l);
        }
    }
    return m;
}

std::string knn_predict(const KnnModel& model, const Eigen::RowVectorXd& query)
{
    const Eigen::Index n = model.points.rows();
    if (n == 0) {
        throw Error(ErrorCode::kEmptyModel, "kNN model has no training points");
    }
    if (query.size() != model.points.cols()) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimensionality differs from model");
    }
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        dist[static_cast<std::size_t>(i)] = distance(model, i, query);
    }
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.lambda), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
                      });

    std::vector<double> votes(model.classes.size(), 0.0);
    const bool exact = dist[order[0]] == 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t i = order[r];
        const double d = dist[i];
        double w = 1.0;
        if (exact) {
            w = d == 0.0 ? 1.0 : 0.0;
        } else if (model.weighting == KnnWeighting::kInverse) {
            w = 1.0 / d;
        } else if (model.weighting == KnnWeighting::kInverseSquare) {
            w = 1.0 / (d * d);
        }
        votes[class_index(model, model.labels[i])] += w;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) {
            best = c;
        }
    }
    return model.classes[best];
}

std::vector<std::string> knn_predict(const KnnModel& model, const Eigen::MatrixXd& queries)
{
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index r = 0; r < queries.rows(); ++r) {
        out.push_back(knn_predict(model, Eigen::RowVectorXd(queries.row(r))));
    }
    return out;
}

nlohmann::json KnnModel::to_json() const
{
    return {
        {"points", matrix_to_json(points)},
        {"labels", labels},
        {"lambda", lambda},
        {"weighting", weighting_name(weighting)},
        {"metric", metric == KnnMetric::kManhattan ? "manhattan" : "euclidean"},
    };
}

KnnModel KnnModel::from_json(const nlohmann::json& j)
{
    try {
        const std::string metric = j.value("metric", std::string("euclidean"));
        if (metric != "euclidean" && metric != "manhattan") {
            throw Error(ErrorCode::kInvalidArgument, "unknown kNN metric: " + metric);
        }
        return knn_fit(matrix_from_json(j.at("points")),
                       j.at("labels").get<std::vector<std::string>>(), j.at("lambda").get<int>(),
                       weighting_from(j.value("weighting", std::string("inverse"))),
                       metric == "manhattan" ? KnnMetric::kManhattan : KnnMetric::kEuclidean);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("kNN JSON: ") + e.what());
    }
}

}  // namespace vidmeta
