#pragma once

// Fisher discriminant projection of selected features onto two axes.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "json.hpp"

namespace vidmeta {

struct LdaOptions {
    // Within-class scatter gets ridge_scale * trace(Sw) / dim added to its
    // diagonal (1e-6 absolute when the trace is zero).
    double ridge_scale = 1e-6;
};

struct LdaModel {
    Eigen::MatrixXd projection;      // dim x 2, applied as x * projection
    Eigen::MatrixXd class_means_2d;  // one row per entry of `classes`
    std::vector<std::string> classes;
    double ridge = 0.0;

    std::size_t input_dim() const { return static_cast<std::size_t>(projection.rows()); }

    nlohmann::json to_json() const;
    static LdaModel from_json(const nlohmann::json& j);
};

// Rows of `x` are samples. Columns are scaled to unit standard deviation
// before the scatter matrices are formed; the scaling is folded into the
// stored projection. With two classes the second axis is zero.
LdaModel lda_fit(const Eigen::MatrixXd& x, const std::vector<std::string>& y,
                 const LdaOptions& options = {});

Eigen::MatrixXd lda_transform(const LdaModel& model, const Eigen::MatrixXd& x);

}  // namespace vidmeta
