#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

struct Metrics {
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
    std::vector<std::int64_t> support;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;  // 0 where undefined
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;  // mean recall over labels with support
    std::optional<std::string> positive_label;
    std::optional<double> tpr;
    std::optional<double> tnr;

    double mean_f1() const;
    nlohmann::json to_json() const;
};

// `labels` fixes the label order; by default the sorted union of both lists.
// With two labels the rates are reported for `positive_label` (default: the
// second label).
Metrics evaluate(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                 const std::optional<std::string>& positive_label = std::nullopt,
                 const std::optional<std::vector<std::string>>& labels = std::nullopt);

}  // namespace vidmeta
