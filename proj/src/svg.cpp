#include "elliptic_lab/svg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ell {

SvgCanvas::SvgCanvas(int width, int height) : width_(width), height_(height) {}

void SvgCanvas::set_view(double x_lo, double x_hi, double y_lo, double y_hi) {
    x_lo_ = x_lo;
    x_hi_ = x_hi;
    y_lo_ = y_lo;
    y_hi_ = y_hi;
}

double SvgCanvas::px(double x) const {
    return (x - x_lo_) / (x_hi_ - x_lo_) * width_;
}

double SvgCanvas::py(double y) const {
    return height_ - (y - y_lo_) / (y_hi_ - y_lo_) * height_;
}

void SvgCanvas::axes() {
    std::ostringstream s;
    s << "<line x1=\"" << px(x_lo_) << "\" y1=\"" << py(0) << "\" x2=\"" << px(x_hi_)
      << "\" y2=\"" << py(0) << "\" stroke=\"#999\" stroke-width=\"1\"/>\n"
      << "<line x1=\"" << px(0) << "\" y1=\"" << py(y_lo_) << "\" x2=\"" << px(0) << "\" y2=\""
      << py(y_hi_) << "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    body_ += s.str();
}

void SvgCanvas::point(double x, double y, const std::string& color, double radius_px) {
    std::ostringstream s;
    s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << radius_px
      << "\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
    body_ += s.str();
}

void SvgCanvas::ellipse(double cx, double cy, double rx, double ry, double rotate_rad,
                        const std::string& color) {
    const double sx = width_ / (x_hi_ - x_lo_);
    const double sy = height_ / (y_hi_ - y_lo_);
    std::ostringstream s;
    s << "<ellipse cx=\"" << px(cx) << "\" cy=\"" << py(cy) << "\" rx=\"" << rx * sx
      << "\" ry=\"" << ry * sy << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" transform=\"rotate(" << -rotate_rad * 180.0 / M_PI << " "
      << px(cx) << " " << py(cy) << ")\"/>\n";
    body_ += s.str();
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& [x, y] : pts) s << px(x) << "," << py(y) << " ";
    s << "\"/>\n";
    body_ += s.str();
}

void SvgCanvas::text(double x, double y, const std::string& label) {
    std::ostringstream s;
    s << "<text x=\"" << px(x) << "\" y=\"" << py(y) << "\" font-size=\"12\">" << label
      << "</text>\n";
    body_ += s.str();
}

std::string SvgCanvas::str() const {
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body_ << "</svg>\n";
    return s.str();
}

void SvgCanvas::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << str();
}

}  // namespace ell
