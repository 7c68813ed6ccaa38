#include "vidmeta/metrics.h"

#include "vidmeta/error.h"

#include <algorithm>
#include <numeric>
#include <set>

namespace vidmeta {

double Metrics::mean_f1() const
{
    if (f1.empty()) {
        return 0.0;
    }
    return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
}

nlohmann::json Metrics::to_json() const
{
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        per_class.push_back({{"label", labels[i]},
                             {"support", support[i]},
                             {"precision", precision[i]},
                             {"recall", recall[i]},
                             {"f1", f1[i]}});
    }
    nlohmann::json j = {
        {"labels", labels},
        {"confusion", confusion},
        {"per_class", per_class},
        {"accuracy", accuracy},
        {"balanced_accuracy", balanced_accuracy},
        {"mean_f1", mean_f1()},
    };
    if (positive_label) {
        j["positive_label"] = *positive_label;
    }
    if (tpr) {
        j["tpr"] = *tpr;
    }
    if (tnr) {
        j["tnr"] = *tnr;
    }
    return j;
}

Metrics evaluate(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                 const std::optional<std::string>& positive_label,
                 const std::optional<std::vector<std::string>>& labels)
{
    if (y_true.size() != y_pred.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "label lists differ in length");
    }
    Metrics m;
    if (labels) {
        m.labels = *labels;
    } else {
        std::set<std::string> all(y_true.begin(), y_true.end());
        all.insert(y_pred.begin(), y_pred.end());
        m.labels.assign(all.begin(), all.end());
    }
    auto index_of = [&](const std::string& l) {
        const auto it = std::find(m.labels.begin(), m.labels.end(), l);
        if (it == m.labels.end()) {
            throw Error(ErrorCode::kUnknownLabel, "label not in label set: " + l);
        }
        return static_cast<std::size_t>(it - m.labels.begin());
    };

    const std::size_t k = m.labels.size();
    m.confusion.assign(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        ++m.confusion[index_of(y_true[i])][index_of(y_pred[i])];
    }

    m.support.assign(k, 0);
    m.precision.assign(k, 0.0);
    m.recall.assign(k, 0.0);
    m.f1.assign(k, 0.0);
    std::int64_t correct = 0;
    double recall_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const std::int64_t tp = m.confusion[c][c];
        std::int64_t predicted = 0;
        for (std::size_t r = 0; r < k; ++r) {
            m.support[c] += m.confusion[c][r];
            predicted += m.confusion[r][c];
        }
        correct += tp;
        if (predicted > 0) {
            m.precision[c] = static_cast<double>(tp) / static_cast<double>(predicted);
        }
        if (m.support[c] > 0) {
            m.recall[c] = static_cast<double>(tp) / static_cast<double>(m.support[c]);
            recall_sum += m.recall[c];
            ++supported;
        }
        if (m.precision[c] + m.recall[c] > 0.0) {
            m.f1[c] = 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c]);
        }
    }
    if (!y_true.empty()) {
        m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
    }
    if (supported > 0) {
        m.balanced_accuracy = recall_sum / static_cast<double>(supported);
    }

    if (positive_label || k == 2) {
        const std::string pos = positive_label ? *positive_label : m.labels[1];
        const std::size_t p = index_of(pos);
        m.positive_label = pos;
        m.tpr = m.recall[p];
        if (k == 2) {
            m.tnr = m.recall[1 - p];
        } else {
            std::int64_t tn = 0;
            std::int64_t neg = 0;
            for (std::size_t r = 0; r < k; ++r) {
                if (r == p) {
                    continue;
                }
                for (std::size_t c = 0; c < k; ++c) {
                    neg += m.confusion[r][c];
                    tn += c == p ? 0 : m.confusion[r][c];
                }
            }
            m.tnr = neg > 0 ? static_cast<double>(tn) / static_cast<double>(neg) : 0.0;
        }
    }
    return m;
}

}  // namespace vidmeta
