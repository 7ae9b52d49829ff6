// SPDX-License-Identifier: Apache-2.0
#include "cmisac/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cmisac {

namespace {

constexpr double kWidth = 760, kHeight = 520;
constexpr double kLeft = 78, kRight = 30, kTop = 48, kBottom = 64;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double to_px(double v, double px_lo, double px_hi) const {
        double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                       : (v - lo) / (hi - lo);
        return px_lo + t * (px_hi - px_lo);
    }
};

std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
    double span = hi - lo;
    if (span <= 0) return {lo};
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
        ticks.push_back(v);
    return ticks;
}

} // namespace

void render_box_figure(const FigureSpec& fig, const std::string& path) {
    if (fig.glyphs.empty()) throw std::invalid_argument("render_box_figure: no glyphs");

    Axis xa, ya;
    xa.log = fig.log_x;
    double xlo = fig.glyphs[0].x, xhi = xlo;
    double ylo = fig.glyphs[0].stats.whisker_low, yhi = fig.glyphs[0].stats.whisker_high;
    for (const auto& g : fig.glyphs) {
        xlo = std::min(xlo, g.x);
        xhi = std::max(xhi, g.x);
        double lo = g.stats.whisker_low, hi = g.stats.whisker_high;
        for (double o : g.stats.outliers) {
            lo = std::min(lo, o);
            hi = std::max(hi, o);
        }
        ylo = std::min({ylo, lo, g.stats.mean});
        yhi = std::max({yhi, hi, g.stats.mean});
    }
    if (fig.log_x) {
        xa.lo = xlo / 1.8;
        xa.hi = xhi * 1.8;
    } else {
        double pad = 0.08 * std::max(xhi - xlo, 1.0);
        xa.lo = xlo - pad;
        xa.hi = xhi + pad;
    }
    double ypad = 0.08 * std::max(yhi - ylo, 1e-12);
    ya.lo = ylo - ypad;
    ya.hi = yhi + ypad;

    const double px0 = kLeft, px1 = kWidth - kRight;
    const double py0 = kHeight - kBottom, py1 = kTop; // y grows upward
    auto X = [&](double v) { return xa.to_px(v, px0, px1); };
    auto Y = [&](double v) { return ya.to_px(v, py0, py1); };

    // Dodge glyphs that share an abscissa so their boxes do not overlap.
    const double box_w = 26.0;
    std::vector<double> cx(fig.glyphs.size());
    for (std::size_t i = 0; i < fig.glyphs.size(); ++i) cx[i] = X(fig.glyphs[i].x);
    for (std::size_t i = 0; i < fig.glyphs.size(); ++i) {
        int before = 0, same = 0;
        for (std::size_t j = 0; j < fig.glyphs.size(); ++j) {
            if (std::abs(X(fig.glyphs[j].x) - X(fig.glyphs[i].x)) < box_w) {
                ++same;
                if (j < i) ++before;
            }
        }
        if (same > 1) cx[i] += (before - 0.5 * (same - 1)) * (box_w + 6.0);
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << fig.title << "</text>\n";

    // axes
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kHeight - 18
        << "\" text-anchor=\"middle\" font-size=\"13\">" << fig.x_label << "</text>\n";
    out << "<text x=\"20\" y=\"" << (py0 + py1) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
        << (py0 + py1) / 2 << ")\">" << fig.y_label << "</text>\n";

    if (fig.log_x) {
        for (double dec = std::pow(10.0, std::floor(std::log10(xa.lo)));
             dec <= xa.hi * 1.0001; dec *= 10.0) {
            if (dec < xa.lo) continue;
            double x = X(dec);
            out << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << x << "\" y2=\""
                << py0 + 5 << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << x << "\" y=\"" << py0 + 20
                << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(dec) << "</text>\n";
        }
    } else {
        for (double t : linear_ticks(xa.lo, xa.hi)) {
            double x = X(t);
            out << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << x << "\" y2=\""
                << py0 + 5 << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << x << "\" y=\"" << py0 + 20
                << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(t) << "</text>\n";
        }
    }
    for (double t : linear_ticks(ya.lo, ya.hi)) {
        double y = Y(t);
        out << "<line x1=\"" << px0 - 5 << "\" y1=\"" << y << "\" x2=\"" << px0 << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px0 - 9 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t) << "</text>\n";
    }

    for (std::size_t i = 0; i < fig.glyphs.size(); ++i) {
        const auto& g = fig.glyphs[i];
        const auto& s = g.stats;
        const double x = cx[i];
        const double hw = box_w / 2;
        // dotted leader to the true abscissa when dodged
        if (std::abs(x - X(g.x)) > 0.5)
            out << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << X(g.x) << "\" y2=\""
                << py0 << "\" stroke=\"" << g.color << "\" stroke-dasharray=\"2,3\"/>\n";
        // whiskers
        out << "<line x1=\"" << x << "\" y1=\"" << Y(s.whisker_low) << "\" x2=\"" << x
            << "\" y2=\"" << Y(s.q1) << "\" stroke=\"" << g.color << "\"/>\n";
        out << "<line x1=\"" << x << "\" y1=\"" << Y(s.q3) << "\" x2=\"" << x << "\" y2=\""
            << Y(s.whisker_high) << "\" stroke=\"" << g.color << "\"/>\n";
        out << "<line x1=\"" << x - hw / 2 << "\" y1=\"" << Y(s.whisker_low) << "\" x2=\""
            << x + hw / 2 << "\" y2=\"" << Y(s.whisker_low) << "\" stroke=\"" << g.color
            << "\"/>\n";
        out << "<line x1=\"" << x - hw / 2 << "\" y1=\"" << Y(s.whisker_high) << "\" x2=\""
            << x + hw / 2 << "\" y2=\"" << Y(s.whisker_high) << "\" stroke=\"" << g.color
            << "\"/>\n";
        // box + median (box has zero height for degenerate distributions)
        out << "<rect class=\"box\" x=\"" << x - hw << "\" y=\"" << Y(s.q3) << "\" width=\""
            << box_w << "\" height=\"" << std::max(0.0, Y(s.q1) - Y(s.q3)) << "\" fill=\"none\""
            << " stroke=\"" << g.color << "\"/>\n";
        out << "<line x1=\"" << x - hw << "\" y1=\"" << Y(s.median) << "\" x2=\"" << x + hw
            << "\" y2=\"" << Y(s.median) << "\" stroke=\"" << g.color << "\"/>\n";
        // outliers
        for (double o : s.outliers)
            out << "<circle cx=\"" << x << "\" cy=\"" << Y(o) << "\" r=\"2.2\" fill=\"none\""
                << " stroke=\"" << g.color << "\"/>\n";
        // mean marker
        out << "<circle cx=\"" << x << "\" cy=\"" << Y(s.mean) << "\" r=\"3.4\" fill=\""
            << g.color << "\"/>\n";
        // legend entry
        double ly = kTop + 16.0 * static_cast<double>(i);
        out << "<circle cx=\"" << px1 - 120 << "\" cy=\"" << ly << "\" r=\"3.4\" fill=\""
            << g.color << "\"/>\n";
        out << "<text x=\"" << px1 - 110 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
            << g.label << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace cmisac
