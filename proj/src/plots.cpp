#include "gammalink/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace gammalink {

namespace {

constexpr double W = 480, H = 360, L = 56, R = 16, T = 32, B = 44;

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
    double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

void axes(std::ostringstream& o, const Frame& f, const std::string& title, const std::string& xl,
          const std::string& yl) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4, yv = f.y0 + (f.y1 - f.y0) * i / 4;
        o << "<text x=\"" << f.px(xv) << "\" y=\"" << H - B + 14 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
        o << "<text x=\"" << L - 4 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">" << xl
      << "</text>\n";
    o << "<text x=\"14\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 14 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\">" << yl << "</text>\n";
}

} // namespace

std::string svg_diagram(const Diagram& D, const std::string& title) {
    double hi = 0.0;
    for (const auto& [d, b] : D.points) hi = std::max(hi, b);
    if (hi <= 0.0) hi = 1.0;
    const Frame f{0.0, hi * 1.05, 0.0, hi * 1.05};
    std::ostringstream o;
    axes(o, f, title, "death", "birth");
    o << "<line x1=\"" << f.px(0) << "\" y1=\"" << f.py(0) << "\" x2=\"" << f.px(f.x1) << "\" y2=\"" << f.py(f.y1)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& [d, b] : D.points)
        o << "<circle cx=\"" << f.px(d) << "\" cy=\"" << f.py(b) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    o << "</svg>\n";
    return o.str();
}

std::string svg_vineyard(const Vineyard& v, const Band* band, const std::string& title) {
    double hi = 0.0;
    for (const auto& p : v.persistences)
        for (double x : p) hi = std::max(hi, x);
    if (band)
        for (const auto& iv : band->intervals)
            for (const auto& [a, b] : iv) hi = std::max(hi, b);
    if (hi <= 0.0) hi = 1.0;
    const double x0 = v.theta.empty() ? 0.0 : v.theta.front();
    double x1 = v.theta.empty() ? 1.0 : v.theta.back();
    if (x1 <= x0) x1 = x0 + 1.0;
    const Frame f{x0, x1, 0.0, hi * 1.05};
    std::ostringstream o;
    axes(o, f, title, "theta", "total persistence");
    if (band) {
        const double half = band->theta.size() > 1 ? 0.5 * (x1 - x0) / (band->theta.size() - 1) : 0.5;
        for (std::size_t i = 0; i < band->theta.size(); ++i)
            for (const auto& [a, b] : band->intervals[i]) {
                const double l = f.px(std::max(x0, band->theta[i] - half)),
                             r = f.px(std::min(x1, band->theta[i] + half));
                o << "<rect x=\"" << l << "\" y=\"" << f.py(b) << "\" width=\"" << r - l << "\" height=\""
                  << f.py(a) - f.py(b) << "\" fill=\"#f2b134\" fill-opacity=\"0.35\"/>\n";
            }
    }
    for (std::size_t i = 0; i < v.theta.size(); ++i)
        for (double p : v.persistences[i])
            o << "<circle cx=\"" << f.px(v.theta[i]) << "\" cy=\"" << f.py(p) << "\" r=\"1.2\" fill=\"#1f5fa8\"/>\n";
    o << "</svg>\n";
    return o.str();
}

} // namespace gammalink
