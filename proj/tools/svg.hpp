#pragma once

// Minimal deterministic SVG canvas for the plot artifacts.  All numbers
// are formatted with fixed precision so repeated runs emit identical
// bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace zictool {

class Svg {
 public:
  Svg(double width, double height) : w_(width), h_(height) {}

  static std::string num(double v) {
    if (!std::isfinite(v)) v = 0.0;
    if (v == 0.0) v = 0.0;  // normalize -0
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  static std::string tick_label(double v) {
    if (v == 0.0) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }

  // Establishes the data-to-pixel frame and draws axes with 5 ticks.
  void frame(double xmin, double xmax, double ymin, double ymax,
             const std::string& title, const std::string& xlab,
             const std::string& ylab) {
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    x0_ = xmin;
    x1_ = xmax;
    y0_ = ymin;
    y1_ = ymax;

    rect(ml_, mt_, w_ - ml_ - mr_, h_ - mt_ - mb_, "none", "#444444");
    for (int i = 0; i <= 4; ++i) {
      double fx = x0_ + (x1_ - x0_) * i / 4.0;
      double fy = y0_ + (y1_ - y0_) * i / 4.0;
      line(px(fx), h_ - mb_, px(fx), h_ - mb_ + 4, "#444444", 1.0);
      text(px(fx), h_ - mb_ + 16, tick_label(fx), "middle", 10);
      line(ml_ - 4, py(fy), ml_, py(fy), "#444444", 1.0);
      text(ml_ - 6, py(fy) + 3, tick_label(fy), "end", 10);
    }
    text(w_ / 2.0, mt_ - 8, title, "middle", 13);
    text(w_ / 2.0, h_ - 6, xlab, "middle", 11);
    vtext(14, h_ / 2.0, ylab, 11);
  }

  double px(double x) const {
    return ml_ + (x - x0_) / (x1_ - x0_) * (w_ - ml_ - mr_);
  }
  double py(double y) const {
    return h_ - mb_ - (y - y0_) / (y1_ - y0_) * (h_ - mt_ - mb_);
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
             "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
  }

  void data_line(double xa, double ya, double xb, double yb,
                 const std::string& stroke, double width,
                 const std::string& dash = {}) {
    line(px(xa), py(ya), px(xb), py(yb), stroke, width, dash);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double width,
                const std::string& dash = {}) {
    if (pts.empty()) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += " points=\"";
    for (const auto& [x, y] : pts)
      body_ += num(px(x)) + "," + num(py(y)) + " ";
    body_ += "\"/>\n";
  }

  void data_rect(double x, double ylo, double yhi, double half_width,
                 const std::string& fill) {
    double left = px(x - half_width);
    double right = px(x + half_width);
    double top = py(yhi);
    double bottom = py(ylo);
    rect(left, top, right - left, bottom - top, fill, "none");
  }

  void data_text(double x, double y, const std::string& s, int size,
                 const std::string& anchor = "middle") {
    text(px(x), py(y), s, anchor, size);
  }

  std::string str() const {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
        num(w_) + "\" height=\"" + num(h_) +
        "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  void line(double xa, double ya, double xb, double yb,
            const std::string& stroke, double width,
            const std::string& dash = {}) {
    body_ += "<line x1=\"" + num(xa) + "\" y1=\"" + num(ya) + "\" x2=\"" +
             num(xb) + "\" y2=\"" + num(yb) + "\" stroke=\"" + stroke +
             "\" stroke-width=\"" + num(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill +
             "\" stroke=\"" + stroke + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor,
            int size) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
             "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" +
             escape(s) + "</text>\n";
  }

  void vtext(double x, double y, const std::string& s, int size) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
             "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
             num(x) + " " + num(y) + ")\">" + escape(s) + "</text>\n";
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '&')
        out += "&amp;";
      else if (c == '<')
        out += "&lt;";
      else if (c == '>')
        out += "&gt;";
      else
        out += c;
    }
    return out;
  }

  double w_, h_;
  double ml_ = 52, mr_ = 16, mt_ = 28, mb_ = 40;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::string body_;
};

}  // namespace zictool
