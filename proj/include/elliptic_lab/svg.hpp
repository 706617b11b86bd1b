#pragma once

#include <string>
#include <vector>

namespace ell {

// Minimal dependency-free SVG canvas: scatter points, ellipse outlines, axes,
// polylines. Data coordinates are mapped into the pixel viewport via set_view.
class SvgCanvas {
public:
    SvgCanvas(int width, int height);

    void set_view(double x_lo, double x_hi, double y_lo, double y_hi);
    void axes();
    void point(double x, double y, const std::string& color, double radius_px = 1.5);
    void ellipse(double cx, double cy, double rx, double ry, double rotate_rad,
                 const std::string& color);
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color);
    void text(double x, double y, const std::string& label);

    std::string str() const;
    void save(const std::string& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    int width_, height_;
    double x_lo_ = -1, x_hi_ = 1, y_lo_ = -1, y_hi_ = 1;
    std::string body_;
};

}  // namespace ell
