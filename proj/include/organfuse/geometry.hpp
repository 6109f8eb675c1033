#pragma once

#include <cmath>

namespace organfuse {

// Axis-aligned rectangle in pixel coordinates, origin at the top-left of
// the image frame. Corner-corner form; coordinates are continuous.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }

  bool operator==(const BoundingBox&) const = default;
};

// A box is valid when all coordinates are finite and non-negative and the
// area is strictly positive. Degenerate boxes are rejected at parse time.
bool is_valid(const BoundingBox& b);

BoundingBox box_from_xywh(double x, double y, double w, double h);

double area(const BoundingBox& b);

double intersection_area(const BoundingBox& a, const BoundingBox& b);

// Intersection over union in [0, 1]; 0 when the rectangles are disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace organfuse
