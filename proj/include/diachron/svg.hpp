// Copyright 2026 The Diachron Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal SVG emission. Coordinates are printed with two decimals so output
// is byte-stable.

#include <sstream>
#include <string>
#include <string_view>

#include "diachron/format.hpp"

namespace diachron::svg {

inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
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

struct Rgb {
  int r = 0, g = 0, b = 0;
};

inline std::string hex(Rgb c) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "#";
  for (int v : {c.r, c.g, c.b}) {
    s += kDigits[(v >> 4) & 0xF];
    s += kDigits[v & 0xF];
  }
  return s;
}

inline Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](int x, int y) {
    return static_cast<int>(x + (y - x) * t + 0.5);
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// Diverging ramp: -1 blue, 0 near-white, +1 red.
inline Rgb diverging(double v) {
  constexpr Rgb kBlue{33, 102, 172}, kWhite{247, 247, 247}, kRed{178, 24, 43};
  if (v < -1) v = -1;
  if (v > 1) v = 1;
  return v < 0 ? lerp(kWhite, kBlue, -v) : lerp(kWhite, kRed, v);
}

inline constexpr std::string_view kMissingColor = "#bdbdbd";

class Document {
 public:
  Document(int width, int height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
         << "\" width=\"" << width << "\" height=\"" << height << "\">\n";
  }

  static std::string num(double v) { return format_fixed(v, 2); }

  void comment(std::string_view text) { out_ << "<!-- " << escape(text) << " -->\n"; }

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view title = {}) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
         << "\" height=\"" << num(h) << "\" fill=\"" << fill << '"';
    if (title.empty()) {
      out_ << "/>\n";
    } else {
      out_ << "><title>" << escape(title) << "</title></rect>\n";
    }
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double width = 1) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
         << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << num(width) << "\"/>\n";
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start",
            int size = 12, double rotate = 0) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\""
         << " font-size=\"" << size << "\" text-anchor=\"" << anchor << '"';
    if (rotate != 0) {
      out_ << " transform=\"rotate(" << num(rotate) << ' ' << num(x) << ' ' << num(y) << ")\"";
    }
    out_ << '>' << escape(s) << "</text>\n";
  }

  void polyline(std::string_view points, std::string_view stroke, double width = 2) {
    out_ << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << stroke
         << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }

  void circle(double cx, double cy, double r, std::string_view fill) {
    out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r)
         << "\" fill=\"" << fill << "\"/>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

}  // namespace diachron::svg
