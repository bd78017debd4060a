#include "wcam/eval/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wcam/util/error.hpp"

namespace wcam::eval {

const std::vector<Color>& palette() {
  static const std::vector<Color> colors = {
      {31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75}};
  return colors;
}

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

Canvas::Canvas(int width, int height, Color background) : image_(width, height) {
  if (width <= 0 || height <= 0) throw ArgumentError("canvas size must be positive");
  fill_rect(0, 0, width, height, background);
}

void Canvas::pixel(int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
  image_.at(x, y, 0) = c.r;
  image_.at(x, y, 1) = c.g;
  image_.at(x, y, 2) = c.b;
}

void Canvas::fill_rect(int x0, int y0, int x1, int y1, Color c) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, image_.width);
  y1 = std::min(y1, image_.height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) pixel(x, y, c);
}

void Canvas::line(int x0, int y0, int x1, int y1, Color c) {
  // Bresenham
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    pixel(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

int Canvas::text_width(const std::string& s, int scale) {
  if (s.empty()) return 0;
  return static_cast<int>(s.size()) * (kGlyphWidth + 1) * scale - scale;
}

void Canvas::text(int x, int y, const std::string& s, Color c, int scale) {
  for (char ch : s) {
    const auto& rows = glyph(ch);
    for (int gy = 0; gy < kGlyphHeight; ++gy)
      for (int gx = 0; gx < kGlyphWidth; ++gx)
        if (rows[gy][gx] == '#') fill_rect(x + gx * scale, y + gy * scale, x + (gx + 1) * scale, y + (gy + 1) * scale, c);
    x += (kGlyphWidth + 1) * scale;
  }
}

namespace {

struct Frame {
  int left, top, right, bottom;
  double lo, hi;

  int y_of(double v) const {
    const double t = (v - lo) / (hi - lo);
    return bottom - static_cast<int>(std::lround(t * (bottom - top)));
  }
};

// Rounds the axis top up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (!(v > 0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= v * (1 - 1e-12)) return m * p;
  return 10 * p;
}

void draw_axes(Canvas& c, const Frame& f, int ticks) {
  c.line(f.left, f.top, f.left, f.bottom, kBlack);
  c.line(f.left, f.bottom, f.right, f.bottom, kBlack);
  for (int t = 0; t <= ticks; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / ticks;
    const int y = f.y_of(v);
    if (t > 0)
      for (int x = f.left + 1; x < f.right; x += 4) c.pixel(x, y, kGrey);
    const auto label = format_number(v);
    c.text(f.left - 6 - Canvas::text_width(label), y - kGlyphHeight / 2, label);
  }
}

void draw_legend(Canvas& c, const std::vector<std::string>& names, int right, int top) {
  int y = top;
  for (std::size_t s = 0; s < names.size(); ++s) {
    const int w = Canvas::text_width(names[s]);
    const Color col = palette()[s % palette().size()];
    c.fill_rect(right - w - 18, y, right - w - 8, y + 7, col);
    c.text(right - w, y, names[s]);
    y += 12;
  }
}

}  // namespace

data::Image bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<BarSeries>& series, int width, int height) {
  if (categories.empty() || series.empty()) throw ArgumentError("bar chart needs categories and series");
  double hi = 0.0;
  for (const auto& s : series) {
    if (s.values.size() != categories.size()) throw ArgumentError("series '" + s.name + "' length mismatch");
    for (double v : s.values)
      if (std::isfinite(v)) hi = std::max(hi, v);
  }
  Canvas c(width, height);
  c.text((width - Canvas::text_width(title, 2)) / 2, 12, title, kBlack, 2);
  const Frame f{70, 48, width - 20, height - 60, 0.0, nice_ceiling(hi)};
  draw_axes(c, f, 5);

  const int slot = (f.right - f.left) / static_cast<int>(categories.size());
  const int bar = std::max(2, (slot - 12) / static_cast<int>(series.size()));
  for (std::size_t k = 0; k < categories.size(); ++k) {
    const int x0 = f.left + static_cast<int>(k) * slot + 6;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = series[s].values[k];
      const int bx = x0 + static_cast<int>(s) * bar;
      if (!std::isfinite(v)) {
        c.text(bx, f.bottom - 10, "X", palette()[s % palette().size()]);
        continue;
      }
      const int top = f.y_of(v);
      c.fill_rect(bx, top, bx + bar - 1, f.bottom, palette()[s % palette().size()]);
      const auto label = format_number(v);
      if (Canvas::text_width(label) <= bar + 4) c.text(bx + (bar - Canvas::text_width(label)) / 2, top - 10, label);
    }
    // category labels wrap onto a second row when they do not fit
    const auto& name = categories[k];
    const int max_chars = std::max(1, slot / (kGlyphWidth + 1));
    const auto first = name.substr(0, static_cast<std::size_t>(max_chars));
    c.text(x0 + (slot - 12 - Canvas::text_width(first)) / 2, f.bottom + 8, first);
    if (name.size() > first.size()) {
      const auto rest = name.substr(first.size(), static_cast<std::size_t>(max_chars));
      c.text(x0 + (slot - 12 - Canvas::text_width(rest)) / 2, f.bottom + 20, rest);
    }
  }
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  draw_legend(c, names, f.right, f.top);
  return c.image();
}

data::Image line_chart(const std::string& title, const std::string& x_label, const std::vector<LineSeries>& series,
                       int width, int height) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ArgumentError("series '" + s.name + "' x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!(x_hi >= x_lo)) throw ArgumentError("line chart has no finite points");
  if (x_hi == x_lo) x_hi = x_lo + 1;
  Canvas c(width, height);
  c.text((width - Canvas::text_width(title, 2)) / 2, 12, title, kBlack, 2);
  const Frame f{70, 48, width - 20, height - 50, 0.0, nice_ceiling(y_hi)};
  draw_axes(c, f, 5);
  auto x_of = [&](double x) {
    return f.left + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * (f.right - f.left)));
  };
  for (int t = 0; t <= 4; ++t) {
    const double x = x_lo + (x_hi - x_lo) * t / 4;
    const auto label = format_number(x);
    c.text(x_of(x) - Canvas::text_width(label) / 2, f.bottom + 6, label);
  }
  c.text((f.left + f.right - Canvas::text_width(x_label)) / 2, f.bottom + 22, x_label);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Color col = palette()[s % palette().size()];
    const auto& xs = series[s].x;
    const auto& ys = series[s].y;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (std::isfinite(ys[i]) && std::isfinite(ys[i + 1]))
        c.line(x_of(xs[i]), f.y_of(ys[i]), x_of(xs[i + 1]), f.y_of(ys[i + 1]), col);
    if (xs.size() == 1 && std::isfinite(ys[0])) c.fill_rect(x_of(xs[0]) - 1, f.y_of(ys[0]) - 1, x_of(xs[0]) + 2, f.y_of(ys[0]) + 2, col);
  }
  std::vector<std::string> names;
  for (const auto& s : series) names.push_back(s.name);
  draw_legend(c, names, f.right, f.top);
  return c.image();
}

}  // namespace wcam::eval
