#include "coxlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "coxlab/error.hpp"
#include "coxlab/io.hpp"

namespace coxlab {

namespace {

constexpr double kWidth = 800.0, kHeight = 600.0;
constexpr double kLeft = 80.0, kRight = 760.0, kTop = 40.0, kBottom = 540.0;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;

    void fit(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double map(double v, double pix_lo, double pix_hi) const {
        double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

std::string header(const std::string& comment_block, const std::string& title) {
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
        "viewBox=\"0 0 800 600\">\n<!--\n";
    out += comment_block;
    out += "-->\n<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"24\" font-family=\"monospace\" font-size=\"16\" "
           "text-anchor=\"middle\">" + title + "</text>\n";
    return out;
}

std::string axes(const std::string& x_label, const std::string& y_label) {
    std::string out;
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(kRight) +
           "\" y2=\"" + num(kBottom) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(kBottom) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"580\" font-family=\"monospace\" "
           "font-size=\"14\" text-anchor=\"middle\">" + x_label + "</text>\n";
    out += "<text x=\"20\" y=\"" + num((kTop + kBottom) / 2) +
           "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 " + num((kTop + kBottom) / 2) + ")\">" + y_label +
           "</text>\n";
    return out;
}

std::string tick_x(double px, const std::string& label) {
    return "<line x1=\"" + num(px) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(px) + "\" y2=\"" +
           num(kBottom + 6) + "\" stroke=\"black\"/>\n<text x=\"" + num(px) + "\" y=\"" +
           num(kBottom + 22) + "\" font-family=\"monospace\" font-size=\"12\" "
           "text-anchor=\"middle\">" + label + "</text>\n";
}

std::string tick_y(double py, const std::string& label) {
    return "<line x1=\"" + num(kLeft - 6) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n<text x=\"" + num(kLeft - 10) +
           "\" y=\"" + num(py + 4) + "\" font-family=\"monospace\" font-size=\"12\" "
           "text-anchor=\"end\">" + label + "</text>\n";
}

std::string scatter_plot(const std::vector<std::pair<double, double>>& pts, Axis ax, Axis ay,
                         const std::string& comment_block, const std::string& title,
                         const std::string& x_label, const std::string& y_label) {
    std::string out = header(comment_block, title);
    out += axes(x_label, y_label);
    for (int i = 0; i <= 4; ++i) {
        double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
        double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
        out += tick_x(ax.map(fx, kLeft, kRight), num(fx));
        out += tick_y(ay.map(fy, kBottom, kTop), num(fy));
    }
    if (pts.size() > 1) {
        std::string path = "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" "
                           "points=\"";
        for (const auto& [x, y] : pts) {
            path += num(ax.map(x, kLeft, kRight)) + "," + num(ay.map(y, kBottom, kTop)) + " ";
        }
        out += path + "\"/>\n";
    }
    for (const auto& [x, y] : pts) {
        out += "<circle cx=\"" + num(ax.map(x, kLeft, kRight)) + "\" cy=\"" +
               num(ay.map(y, kBottom, kTop)) + "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    return out + "</svg>\n";
}

std::string theta_vs_lambda(const std::string& table_text, const std::string& comment_block) {
    std::vector<ThetaEstimate> rows = parse_theta_table(table_text);
    std::sort(rows.begin(), rows.end(), [](const ThetaEstimate& a, const ThetaEstimate& b) {
        return a.lambda < b.lambda;
    });
    Axis ax{0.0, 1.0}, ay{0.0, 1.0};
    std::vector<std::pair<double, double>> pts;
    for (const ThetaEstimate& r : rows) {
        ax.fit(r.lambda);
        pts.emplace_back(r.lambda, r.theta);
    }
    return scatter_plot(pts, ax, ay, comment_block, "theta vs lambda", "lambda", "theta");
}

std::string theta_vs_n_log(const std::string& table_text, const std::string& comment_block) {
    std::vector<ThetaEstimate> rows = parse_theta_table(table_text);
    std::sort(rows.begin(), rows.end(),
              [](const ThetaEstimate& a, const ThetaEstimate& b) { return a.n < b.n; });
    Axis ax{0.0, 1.0}, ay{-1.0, 0.0};
    std::vector<std::pair<double, double>> pts;
    bool first = true;
    for (const ThetaEstimate& r : rows) {
        if (r.theta <= 0.0) continue;  // log axis: zero estimates are unplottable
        double y = std::log10(r.theta);
        if (first) {
            ax = Axis{double(r.n), double(r.n)};
            ay = Axis{y, y};
            first = false;
        }
        ax.fit(double(r.n));
        ay.fit(y);
        pts.emplace_back(double(r.n), y);
    }
    if (ax.hi == ax.lo) ax.hi = ax.lo + 1.0;
    if (ay.hi == ay.lo) ay.lo = ay.hi - 1.0;
    return scatter_plot(pts, ax, ay, comment_block, "theta vs n (log scale)", "n",
                        "log10(theta)");
}

std::string revealment_map(const std::string& table_text, const std::string& comment_block) {
    std::vector<RevealmentRow> rows = parse_revealment_table(table_text);
    std::string out = header(comment_block, "revealment map");
    out += axes("block x", "block y");
    if (!rows.empty()) {
        std::int64_t xlo = rows[0].x, xhi = rows[0].x, ylo = rows[0].y, yhi = rows[0].y;
        double dmax = 0.0;
        for (const RevealmentRow& r : rows) {
            xlo = std::min(xlo, r.x);
            xhi = std::max(xhi, r.x);
            ylo = std::min(ylo, r.y);
            yhi = std::max(yhi, r.y);
            dmax = std::max(dmax, r.delta);
        }
        double nx = double(xhi - xlo + 1), ny = double(yhi - ylo + 1);
        double cell = std::min((kRight - kLeft) / nx, (kBottom - kTop) / ny);
        for (const RevealmentRow& r : rows) {
            double px = kLeft + (double(r.x - xlo)) * cell;
            double py = kBottom - (double(r.y - ylo) + 1.0) * cell;
            int shade = dmax > 0.0 ? int(std::lround(255.0 * (1.0 - r.delta / dmax))) : 255;
            out += "<rect x=\"" + num(px) + "\" y=\"" + num(py) + "\" width=\"" + num(cell) +
                   "\" height=\"" + num(cell) + "\" fill=\"rgb(" + std::to_string(shade) + "," +
                   std::to_string(shade) + ",255)\"/>\n";
        }
        out += tick_x(kLeft, std::to_string(xlo));
        out += tick_x(kLeft + nx * cell, std::to_string(xhi + 1));
        out += tick_y(kBottom, std::to_string(ylo));
        out += tick_y(kBottom - ny * cell, std::to_string(yhi + 1));
    }
    return out + "</svg>\n";
}

}  // namespace

const char* plot_kind_name(PlotKind kind) {
    switch (kind) {
        case PlotKind::ThetaVsLambda: return "theta_vs_lambda";
        case PlotKind::ThetaVsNLog: return "theta_vs_n_log";
        case PlotKind::RevealmentMap: return "revealment_map";
    }
    return "?";
}

PlotKind plot_kind_from_name(const std::string& name) {
    if (name == "theta_vs_lambda") return PlotKind::ThetaVsLambda;
    if (name == "theta_vs_n_log") return PlotKind::ThetaVsNLog;
    if (name == "revealment_map") return PlotKind::RevealmentMap;
    throw Error(ErrorCode::CONFIG, "key 'kind': unknown plot kind '" + name + "'");
}

std::string render_plot(PlotKind kind, const std::string& table_text,
                        const std::string& comment_block) {
    switch (kind) {
        case PlotKind::ThetaVsLambda: return theta_vs_lambda(table_text, comment_block);
        case PlotKind::ThetaVsNLog: return theta_vs_n_log(table_text, comment_block);
        case PlotKind::RevealmentMap: return revealment_map(table_text, comment_block);
    }
    throw Error(ErrorCode::CONFIG, "unknown plot kind");
}

}  // namespace coxlab
