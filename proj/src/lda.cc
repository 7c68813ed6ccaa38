#include "vidmeta/lda.h"

#include "vidmeta/error.h"
#include "vidmeta/json_matrix.h"

#include <algorithm>
#include <cmath>
#include <map>

namespace vidmeta {

LdaModel lda_fit(const Eigen::MatrixXd& x, const std::vector<std::string>& y,
                 const LdaOptions& options)
{
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "sample and label counts differ");
    }
    std::map<std::string, std::vector<Eigen::Index>> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
        members[y[i]].push_back(static_cast<Eigen::Index>(i));
    }
    if (members.size() < 2) {
        throw Error(ErrorCode::kDegenerateLabels, "LDA needs at least two classes");
    }
    const Eigen::Index d = x.cols();
    if (d == 0) {
        throw Error(ErrorCode::kDimensionMismatch, "LDA needs at least one feature");
    }

    // Unit-variance scaling; constant columns are left as they are.
    const Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::VectorXd scale(d);
    for (Eigen::Index c = 0; c < d; ++c) {
        const double var = (x.col(c).array() - mean(c)).square().mean();
        scale(c) = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
    const Eigen::MatrixXd z = x * scale.asDiagonal();
    const Eigen::RowVectorXd z_mean = z.colwise().mean();

    Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [label, rows] : members) {
        Eigen::MatrixXd zc(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            zc.row(static_cast<Eigen::Index>(r)) = z.row(rows[r]);
        }
        const Eigen::RowVectorXd mc = zc.colwise().mean();
        zc.rowwise() -= mc;
        sw.noalias() += zc.transpose() * zc;
        const Eigen::RowVectorXd dm = mc - z_mean;
        sb.noalias() += static_cast<double>(rows.size()) * dm.transpose() * dm;
    }

    const double trace = sw.trace();
    const double ridge = trace > 0.0 ? options.ridge_scale * trace / static_cast<double>(d) : 1e-6;
    sw.diagonal().array() += ridge;

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(sb, sw);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::kDegenerateLabels, "LDA eigen decomposition failed");
    }
    // Eigenvalues ascend; the discriminant axes are the last columns.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, 2);
    const Eigen::Index axes = std::min<Eigen::Index>(members.size() == 2 ? 1 : 2, d);
    for (Eigen::Index a = 0; a < axes; ++a) {
        Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - a);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) {
            v = -v;
        }
        w.col(a) = v;
    }

    LdaModel model;
    model.projection = scale.asDiagonal() * w;
    model.ridge = ridge;
    const Eigen::MatrixXd projected = x * model.projection;
    model.class_means_2d.resize(static_cast<Eigen::Index>(members.size()), 2);
    Eigen::Index k = 0;
    for (const auto& [label, rows] : members) {
        model.classes.push_back(label);
        Eigen::RowVector2d sum = Eigen::RowVector2d::Zero();
        for (Eigen::Index r : rows) {
            sum += projected.row(r);
        }
        model.class_means_2d.row(k++) = sum / static_cast<double>(rows.size());
    }
    return model;
}

Eigen::MatrixXd lda_transform(const LdaModel& model, const Eigen::MatrixXd& x)
{
    if (x.cols() != model.projection.rows()) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "expected " + std::to_string(model.projection.rows()) + " features, got "
                        + std::to_string(x.cols()));
    }
    return x * model.projection;
}

nlohmann::json LdaModel::to_json() const
{
    return {
        {"projection", matrix_to_json(projection)},
        {"class_means_2d", matrix_to_json(class_means_2d)},
        {"classes", classes},
        {"ridge", format_double(ridge)},
    };
}

LdaModel LdaModel::from_json(const nlohmann::json& j)
{
    LdaModel m;
    try {
        m.projection = matrix_from_json(j.at("projection"));
        m.class_means_2d = matrix_from_json(j.at("class_means_2d"));
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.ridge = parse_double(j.at("ridge").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("LDA JSON: ") + e.what());
    }
    return m;
}

}  // namespace vidmeta
