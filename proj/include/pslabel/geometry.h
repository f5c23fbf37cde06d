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

#ifndef PSLABEL_GEOMETRY_H_
#define PSLABEL_GEOMETRY_H_

#include <array>

namespace pslabel {

// Axis-aligned box in corner format (x1, y1) top-left, (x2, y2) bottom-right,
// continuous pixel coordinates (no "+1" convention). Zero-area boxes are
// allowed; inverted corners and non-finite coordinates are rejected.
class BBox {
 public:
  // The unit-free empty box [0,0,0,0].
  constexpr BBox() = default;

  // Throws InvalidArgumentError if x2 < x1, y2 < y1 or any value is not
  // finite.
  BBox(double x1, double y1, double x2, double y2);

  // Converts a COCO (x, y, width, height) box. Throws like the constructor
  // when width or height is negative.
  static BBox FromXywh(double x, double y, double width, double height);

  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double x2() const { return x2_; }
  double y2() const { return y2_; }
  double width() const { return x2_ - x1_; }
  double height() const { return y2_ - y1_; }

  // Coordinates in x1, y1, x2, y2 order.
  std::array<double, 4> corners() const { return {x1_, y1_, x2_, y2_}; }

  // COCO (x, y, w, h). Widths are chosen so that FromXywh(ToXywh()) restores
  // the corners bit-exactly whenever floating point permits.
  std::array<double, 4> ToXywh() const;

  BBox Translated(double dx, double dy) const;
  // Multiplies every coordinate by `s` (s > 0).
  BBox Scaled(double s) const;

  friend bool operator==(const BBox&, const BBox&) = default;

 private:
  double x1_ = 0.0;
  double y1_ = 0.0;
  double x2_ = 0.0;
  double y2_ = 0.0;
};

double Area(const BBox& b);

// Intersection over union; 0 when the union area is 0.
double Iou(const BBox& a, const BBox& b);

}  // namespace pslabel

#endif  // PSLABEL_GEOMETRY_H_
