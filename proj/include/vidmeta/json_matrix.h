#pragma once

// Matrices as JSON: {"rows", "cols", "data"} with row-major entries written
// as "%.17g" decimal text so values survive a round trip exactly.

#include <Eigen/Dense>

#include <string>

#include "json.hpp"

namespace vidmeta {

std::string format_double(double v);
double parse_double(const std::string& s);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

}  // namespace vidmeta
