#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace quva {

/// Minimal static-SVG emitter: enough for line/scatter result plots.
class SvgCanvas {
public:
    SvgCanvas(int width, int height) : w_(width), h_(height) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
             << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n";
        out_ << "<rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_ << "\" fill=\"white\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333",
              double width = 1.0) {
        out_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\""
             << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width = 1.5) {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\" points=\"";
        for (const auto& [x, y] : pts) out_ << x << "," << y << " ";
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
        out_ << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r << "\" fill=\"" << fill
             << "\" fill-opacity=\"" << opacity << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12, const std::string& anchor = "start",
              const std::string& fill = "#222") {
        out_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\">" << escape(s)
             << "</text>\n";
    }

    int width() const { return w_; }
    int height() const { return h_; }

    std::string str() const { return out_.str() + "</svg>\n"; }

private:
    static std::string escape(const std::string& s) {
        std::string t;
        for (char c : s) {
            if (c == '<') t += "&lt;";
            else if (c == '>') t += "&gt;";
            else if (c == '&') t += "&amp;";
            else t += c;
        }
        return t;
    }

    int w_, h_;
    std::ostringstream out_;
};

/// Affine map from data coordinates to a pixel viewport (y flipped).
struct AxisMap {
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    double px = 60, py = 20, pw = 520, ph = 320;  // viewport: origin and size

    double x(double v) const { return px + (v - x_min) / span(x_max - x_min) * pw; }
    double y(double v) const { return py + ph - (v - y_min) / span(y_max - y_min) * ph; }

    static double span(double s) { return s == 0.0 ? 1.0 : s; }

    void draw_frame(SvgCanvas& svg, const std::string& x_label, const std::string& y_label) const {
        svg.line(px, py, px, py + ph, "#000");
        svg.line(px, py + ph, px + pw, py + ph, "#000");
        for (int i = 0; i <= 4; ++i) {
            const double fx = x_min + (x_max - x_min) * i / 4.0;
            const double fy = y_min + (y_max - y_min) * i / 4.0;
            svg.line(x(fx), py + ph, x(fx), py + ph + 4, "#000");
            svg.line(px - 4, y(fy), px, y(fy), "#000");
            svg.text(x(fx), py + ph + 16, format_tick(fx), 10, "middle");
            svg.text(px - 6, y(fy) + 3, format_tick(fy), 10, "end");
        }
        svg.text(px + pw / 2, py + ph + 32, x_label, 12, "middle");
        svg.text(14, py + ph / 2, y_label, 12, "middle");
    }

    static std::string format_tick(double v) {
        std::ostringstream s;
        if (std::abs(v) >= 1000 || (std::abs(v) < 0.01 && v != 0.0)) s.precision(2), s << std::scientific;
        else s.precision(3);
        s << v;
        return s.str();
    }
};

}  // namespace quva
