// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "cmisac/bench.hpp"

namespace cmisac {

/// One box glyph of a figure: a scheme's radar-metric distribution placed at
/// its communications-metric abscissa.
struct BoxGlyph {
    std::string label;
    double x = 0.0;
    BoxStats stats;
    std::string color = "#000000";
};

struct FigureSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<BoxGlyph> glyphs;
};

/// Hand-built static SVG box plot; glyphs sharing an abscissa are dodged
/// horizontally with a dotted leader back to the true value.
void render_box_figure(const FigureSpec& fig, const std::string& path);

} // namespace cmisac
