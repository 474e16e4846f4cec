#include "qts/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qts/scenario.hpp"

namespace qts::cli {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Axis {
    double lo, hi;
    bool log;
    double pixel_lo, pixel_hi;

    double map(double v) const {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double u = log ? std::log10(v) : v;
        return pixel_lo + (u - a) / (b - a) * (pixel_hi - pixel_lo);
    }
    bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

} // namespace

std::string render_svg(const Plot& plot) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (plot.log_x && s.x[i] <= 0.0) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    if (!std::isfinite(xlo)) { xlo = plot.log_x ? 1.0 : 0.0; xhi = 10.0; }
    if (!std::isfinite(ylo)) { ylo = 0.0; yhi = 1.0; }
    if (xhi <= xlo) xhi = xlo + (plot.log_x ? 10.0 * xlo : 1.0);
    if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad;
    yhi += pad;

    const Axis ax{xlo, xhi, plot.log_x, kLeft, kWidth - kRight};
    const Axis ay{ylo, yhi, false, kHeight - kBottom, kTop};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
       << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // x ticks: decades on a log axis, five intervals otherwise
    std::vector<double> xticks;
    if (plot.log_x) {
        for (double e = std::ceil(std::log10(xlo)); e <= std::floor(std::log10(xhi)); e += 1.0)
            xticks.push_back(std::pow(10.0, e));
    } else {
        for (int i = 0; i <= 5; ++i) xticks.push_back(xlo + (xhi - xlo) * i / 5.0);
    }
    for (double t : xticks) {
        const double px = ax.map(t);
        os << "<line x1=\"" << num(px) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(px)
           << "\" y2=\"" << num(kHeight - kBottom + 5) << "\" stroke=\"black\"/>"
           << "<text x=\"" << num(px) << "\" y=\"" << num(kHeight - kBottom + 18)
           << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = ylo + (yhi - ylo) * i / 4.0;
        const double py = ay.map(v);
        os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft)
           << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>"
           << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">"
           << tick_label(v) << "</text>\n";
    }
    os << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 12)
       << "\" text-anchor=\"middle\">" << escape(plot.x_label) << (plot.log_x ? " (log)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << num((kTop + kHeight - kBottom) / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

    for (const auto& m : plot.markers) {
        if (!ax.usable(m.x) || m.x < xlo || m.x > xhi) continue;
        const double px = ax.map(m.x);
        os << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px) << "\" y2=\""
           << num(kHeight - kBottom) << "\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>"
           << "<text x=\"" << num(px + 3) << "\" y=\"" << num(kTop + 12) << "\" fill=\"gray\">"
           << escape(m.label) << "</text>\n";
    }

    std::size_t legend_row = 0;
    for (const auto& s : plot.series) {
        const std::string style = "fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"" +
                                  (s.dashed ? " stroke-dasharray=\"6,4\"" : "");
        std::string points;
        auto flush = [&] {
            if (!points.empty()) os << "<polyline " << style << " points=\"" << points << "\"/>\n";
            points.clear();
        };
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!ax.usable(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            points += num(ax.map(s.x[i])) + "," + num(ay.map(s.y[i])) + " ";
        }
        flush();
        const double ly = kTop + 10 + 18.0 * static_cast<double>(legend_row++);
        const double lx = kWidth - kRight + 12;
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\""
           << num(ly) << "\" " << style << "/><text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4)
           << "\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::filesystem::path& path, const Plot& plot) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << render_svg(plot);
    if (!os) throw IoError("failed writing " + path.string());
}

} // namespace qts::cli
