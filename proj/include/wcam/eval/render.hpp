#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wcam/data/image.hpp"

namespace wcam::eval {

inline constexpr int kGlyphWidth = 5;
inline constexpr int kGlyphHeight = 7;

// 5x7 bitmap of an ASCII character; lowercase renders as uppercase and
// characters without a glyph render as '?'.
const std::array<const char*, kGlyphHeight>& glyph(char c);

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kGrey{200, 200, 200};

// Colours cycled through by chart series.
const std::vector<Color>& palette();

class Canvas {
 public:
  Canvas(int width, int height, Color background = kWhite);

  int width() const { return image_.width; }
  int height() const { return image_.height; }

  void pixel(int x, int y, Color c);
  void fill_rect(int x0, int y0, int x1, int y1, Color c);  // half-open [x0, x1) x [y0, y1)
  void line(int x0, int y0, int x1, int y1, Color c);
  void text(int x, int y, const std::string& s, Color c = kBlack, int scale = 1);

  static int text_width(const std::string& s, int scale = 1);
  static int text_height(int scale = 1) { return kGlyphHeight * scale; }

  const data::Image& image() const { return image_; }

 private:
  data::Image image_;
};

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category; NaN draws no bar
};

// Grouped vertical bars with a zero baseline, value labels and a legend.
data::Image bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<BarSeries>& series, int width = 960, int height = 540);

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

data::Image line_chart(const std::string& title, const std::string& x_label, const std::vector<LineSeries>& series,
                       int width = 960, int height = 540);

// Shortest "%g"-style rendering with at most `digits` significant digits.
std::string format_number(double v, int digits = 3);

}  // namespace wcam::eval
