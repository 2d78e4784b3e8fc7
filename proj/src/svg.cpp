#include "hhimerge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hhimerge::svg {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 60.0;

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string scatter_with_diagonal(const std::vector<Point>& points, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    // Shared range on both axes so the diagonal is the 45-degree line.
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        if (first) {
            lo = std::min(p.x, p.y);
            hi = std::max(p.x, p.y);
            first = false;
        }
        lo = std::min({lo, p.x, p.y});
        hi = std::max({hi, p.x, p.y});
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.03 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double plot = kSize - 2.0 * kMargin;
    auto sx = [&](double x) { return kMargin + (x - lo) / (hi - lo) * plot; };
    auto sy = [&](double y) { return kSize - kMargin - (y - lo) / (hi - lo) * plot; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << plot << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(sx(lo)) << "\" y1=\"" << num(sy(lo)) << "\" x2=\"" << num(sx(hi)) << "\" y2=\""
        << num(sy(hi)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        out << "<text x=\"" << num(sx(v)) << "\" y=\"" << kSize - kMargin + 16
            << "\" text-anchor=\"middle\" font-size=\"10\">" << num(v) << "</text>\n";
        out << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(sy(v) + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << num(v) << "</text>\n";
    }
    out << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 18 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << kSize / 2 << ")\">" << escape(y_label) << "</text>\n";
    out << "<g fill=\"steelblue\" fill-opacity=\"0.5\">\n";
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        out << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.y)) << "\" r=\"1.5\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace hhimerge::svg
