#include "organfuse/geometry.hpp"

#include <algorithm>

namespace organfuse {

bool is_valid(const BoundingBox& b) {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) &&
         std::isfinite(b.x_max) && std::isfinite(b.y_max) &&
         b.x_min >= 0.0 && b.y_min >= 0.0 &&
         b.x_max > b.x_min && b.y_max > b.y_min;
}

BoundingBox box_from_xywh(double x, double y, double w, double h) {
  return BoundingBox{x, y, x + w, y + h};
}

double area(const BoundingBox& b) {
  return (b.x_max - b.x_min) * (b.y_max - b.y_min);
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = area(a) + area(b) - inter;
  return inter / uni;
}

}  // namespace organfuse
