#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vidmeta {

struct Bounds2d {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    // Bounding box of the rows of `points` (first two columns), grown by
    // `margin` times its extent on every side.
    static Bounds2d around(const Eigen::MatrixXd& points, double margin = 0.05)
    {
        Bounds2d b;
        if (points.rows() == 0 || points.cols() < 2) {
            return b;
        }
        b.x_min = points.col(0).minCoeff();
        b.x_max = points.col(0).maxCoeff();
        b.y_min = points.col(1).minCoeff();
        b.y_max = points.col(1).maxCoeff();
        const double wx = b.x_max - b.x_min > 0.0 ? b.x_max - b.x_min : 1.0;
        const double wy = b.y_max - b.y_min > 0.0 ? b.y_max - b.y_min : 1.0;
        b.x_min -= margin * wx;
        b.x_max += margin * wx;
        b.y_min -= margin * wy;
        b.y_max += margin * wy;
        if (b.x_max == b.x_min) {
            b.x_max = b.x_min + 1.0;
        }
        if (b.y_max == b.y_min) {
            b.y_max = b.y_min + 1.0;
        }
        return b;
    }
};

struct LabelGrid {
    Bounds2d bounds;
    int nx = 0;
    int ny = 0;
    std::vector<std::string> labels;  // row-major, row 0 at y_min

    const std::string& at(int ix, int iy) const
    {
        return labels[static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx)
                      + static_cast<std::size_t>(ix)];
    }
    Eigen::RowVector2d cell_center(int ix, int iy) const
    {
        return {bounds.x_min + (ix + 0.5) * (bounds.x_max - bounds.x_min) / nx,
                bounds.y_min + (iy + 0.5) * (bounds.y_max - bounds.y_min) / ny};
    }
};

// Labels each cell with `predict` evaluated at the cell centre.
template <typename Predict>
LabelGrid decision_grid(Predict&& predict, const Bounds2d& bounds, int nx, int ny)
{
    LabelGrid grid;
    grid.bounds = bounds;
    grid.nx = nx < 1 ? 1 : nx;
    grid.ny = ny < 1 ? 1 : ny;
    grid.labels.reserve(static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny));
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Eigen::RowVectorXd p = grid.cell_center(ix, iy);
            grid.labels.push_back(predict(p));
        }
    }
    return grid;
}

}  // namespace vidmeta
