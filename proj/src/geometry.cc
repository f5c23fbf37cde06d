// Copyright 2026 The pslabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pslabel/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pslabel/error.h"

namespace pslabel {
namespace {

// Smallest-magnitude extent `e` near `hi - lo` with lo + e == hi, searched a
// few ulps either side of the direct difference.
double ExactExtent(double lo, double hi) {
  const double direct = hi - lo;
  if (lo + direct == hi) return direct;
  double down = direct;
  double up = direct;
  for (int step = 0; step < 4; ++step) {
    down = std::nextafter(down, -std::numeric_limits<double>::infinity());
    up = std::nextafter(up, std::numeric_limits<double>::infinity());
    if (down >= 0.0 && lo + down == hi) return down;
    if (lo + up == hi) return up;
  }
  return direct;
}

}  // namespace

BBox::BBox(double x1, double y1, double x2, double y2)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
      !std::isfinite(y2)) {
    throw InvalidArgumentError("box coordinates must be finite");
  }
  if (x2 < x1 || y2 < y1) {
    throw InvalidArgumentError(
        "inverted box corners [" + std::to_string(x1) + ", " +
        std::to_string(y1) + ", " + std::to_string(x2) + ", " +
        std::to_string(y2) + "]");
  }
}

BBox BBox::FromXywh(double x, double y, double width, double height) {
  if (width < 0.0 || height < 0.0) {
    throw InvalidArgumentError("box width and height must be non-negative");
  }
  return BBox(x, y, x + width, y + height);
}

std::array<double, 4> BBox::ToXywh() const {
  return {x1_, y1_, ExactExtent(x1_, x2_), ExactExtent(y1_, y2_)};
}

BBox BBox::Translated(double dx, double dy) const {
  return BBox(x1_ + dx, y1_ + dy, x2_ + dx, y2_ + dy);
}

BBox BBox::Scaled(double s) const {
  if (!(s > 0.0)) throw InvalidArgumentError("scale must be positive");
  return BBox(x1_ * s, y1_ * s, x2_ * s, y2_ * s);
}

double Area(const BBox& b) { return b.width() * b.height(); }

double Iou(const BBox& a, const BBox& b) {
  const double iw =
      std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double ih =
      std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = Area(a) + Area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace pslabel
