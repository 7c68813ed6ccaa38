#include "vidmeta/svg.h"

#include "vidmeta/error.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace vidmeta {
namespace {

    constexpr double kWidth = 760.0;
    constexpr double kHeight = 540.0;
    constexpr double kLeft = 50.0;
    constexpr double kTop = 40.0;
    constexpr double kPlotW = 500.0;
    constexpr double kPlotH = 460.0;

    std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        std::string s = buf;
        return s == "-0.00" ? "0.00" : s;
    }

    std::string xml_escape(const std::string& s)
    {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
            }
        }
        return out;
    }

}  // namespace

std::string palette_color(std::size_t i)
{
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                   "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173",
                                   "#3182bd"};
    return colors[i % std::size(colors)];
}

std::string emit_svg(const PlotInput& in)
{
    const auto n = static_cast<std::size_t>(in.points.rows());
    if (in.labels.size() != n || (!in.markers.empty() && in.markers.size() != n)
        || (n > 0 && in.points.cols() < 2)) {
        throw Error(ErrorCode::kDimensionMismatch, "plot inputs have inconsistent lengths");
    }

    std::vector<std::string> legend = in.legend;
    if (legend.empty()) {
        std::set<std::string> all(in.labels.begin(), in.labels.end());
        if (in.grid) {
            all.insert(in.grid->labels.begin(), in.grid->labels.end());
        }
        legend.assign(all.begin(), all.end());
    }
    auto color_of = [&](const std::string& label) {
        const auto it = std::find(legend.begin(), legend.end(), label);
        return it == legend.end() ? std::string("#777777")
                                  : palette_color(static_cast<std::size_t>(it - legend.begin()));
    };

    const Bounds2d b = in.grid ? in.grid->bounds : Bounds2d::around(in.points);
    const double sx = kPlotW / (b.x_max - b.x_min);
    const double sy = kPlotH / (b.y_max - b.y_min);
    auto px = [&](double x) { return kLeft + (x - b.x_min) * sx; };
    auto py = [&](double y) { return kTop + kPlotH - (y - b.y_min) * sy; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"#ffffff\"/>\n";
    if (!in.title.empty()) {
        o << "<text x=\"" << num(kLeft) << "\" y=\"24.00\" font-family=\"sans-serif\" "
          << "font-size=\"15\">" << xml_escape(in.title) << "</text>\n";
    }

    if (in.grid) {
        const LabelGrid& g = *in.grid;
        const double cw = kPlotW / g.nx;
        const double ch = kPlotH / g.ny;
        o << "<g class=\"regions\" fill-opacity=\"0.22\" shape-rendering=\"crispEdges\">\n";
        for (int iy = 0; iy < g.ny; ++iy) {
            for (int ix = 0; ix < g.nx; ++ix) {
                o << "<rect x=\"" << num(kLeft + ix * cw) << "\" y=\""
                  << num(kTop + kPlotH - (iy + 1) * ch) << "\" width=\"" << num(cw)
                  << "\" height=\"" << num(ch) << "\" fill=\"" << color_of(g.at(ix, iy))
                  << "\"/>\n";
            }
        }
        o << "</g>\n";
    }
    o << "<rect class=\"frame\" x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
      << num(kPlotW) << "\" height=\"" << num(kPlotH)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    o << "<g class=\"points\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = px(in.points(r, 0));
        const double y = py(in.points(r, 1));
        const std::string fill = color_of(in.labels[i]);
        const MarkerKind kind = in.markers.empty() ? MarkerKind::kTrain : in.markers[i];
        if (kind == MarkerKind::kTrain) {
            o << "<circle class=\"marker train\" cx=\"" << num(x) << "\" cy=\"" << num(y)
              << "\" r=\"3.50\" fill=\"" << fill << "\"/>\n";
        } else if (kind == MarkerKind::kValidation) {
            o << "<rect class=\"marker validation\" x=\"" << num(x - 3.5) << "\" y=\""
              << num(y - 3.5) << "\" width=\"7.00\" height=\"7.00\" fill=\"" << fill
              << "\" stroke=\"#000000\" stroke-width=\"0.50\"/>\n";
        } else {
            o << "<circle class=\"marker holdout\" cx=\"" << num(x) << "\" cy=\"" << num(y)
              << "\" r=\"5.00\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1.50\"/>\n";
        }
    }
    o << "</g>\n";

    o << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = kTop + 10.0;
    for (std::size_t i = 0; i < legend.size(); ++i) {
        o << "<g class=\"legend-entry\"><rect x=\"" << num(kLeft + kPlotW + 20.0) << "\" y=\""
          << num(ly - 9.0) << "\" width=\"12.00\" height=\"12.00\" fill=\"" << palette_color(i)
          << "\"/><text x=\"" << num(kLeft + kPlotW + 38.0) << "\" y=\"" << num(ly + 1.0)
          << "\">" << xml_escape(legend[i]) << "</text></g>\n";
        ly += 18.0;
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

}  // namespace vidmeta
