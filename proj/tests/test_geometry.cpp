#include <doctest.h>

#include <random>

#include "organfuse/geometry.hpp"

using namespace organfuse;

namespace {

// Integer-valued boxes keep all IoU arithmetic exact, so the properties
// below can assert with ==.
BoundingBox random_int_box(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coord(0, 40);
  std::uniform_int_distribution<int> extent(1, 30);
  const int x = coord(rng);
  const int y = coord(rng);
  return BoundingBox{static_cast<double>(x), static_cast<double>(y),
                     static_cast<double>(x + extent(rng)),
                     static_cast<double>(y + extent(rng))};
}

}  // namespace

TEST_CASE("box validity") {
  CHECK(is_valid(BoundingBox{0, 0, 10, 10}));
  CHECK_FALSE(is_valid(BoundingBox{0, 0, 0, 10}));   // zero width
  CHECK_FALSE(is_valid(BoundingBox{0, 0, 10, 0}));   // zero height
  CHECK_FALSE(is_valid(BoundingBox{5, 0, 4, 10}));   // inverted
  CHECK_FALSE(is_valid(BoundingBox{-1, 0, 10, 10})); // negative corner
  const double nan = std::nan("");
  CHECK_FALSE(is_valid(BoundingBox{0, 0, nan, 10}));
}

TEST_CASE("area fixtures") {
  CHECK(area(BoundingBox{0, 0, 10, 10}) == 100.0);
  CHECK(area(BoundingBox{0, 0, 1, 1}) == 1.0);
  CHECK(area(BoundingBox{2, 3, 7, 5}) == 10.0);
}

TEST_CASE("iou fixtures") {
  const BoundingBox unit{0, 0, 10, 10};
  CHECK(iou(unit, unit) == 1.0);
  CHECK(iou(BoundingBox{0, 0, 1, 1}, BoundingBox{5, 5, 6, 6}) == 0.0);
  // Intersection 5x5 = 25; union 100 + 100 - 25 = 175.
  CHECK(iou(unit, BoundingBox{5, 5, 15, 15}) == doctest::Approx(25.0 / 175.0).epsilon(1e-12));
}

TEST_CASE("box_from_xywh") {
  const BoundingBox b = box_from_xywh(2, 3, 5, 2);
  CHECK(b == BoundingBox{2, 3, 7, 5});
}

TEST_CASE("iou properties on random integer boxes") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundingBox a = random_int_box(rng);
    const BoundingBox b = random_int_box(rng);
    const double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(a, a) == 1.0);
    // Zero exactly when there is no shared interior area.
    CHECK((v == 0.0) == (intersection_area(a, b) == 0.0));
    // Translation by integer offsets is exact.
    const double tx = 7, ty = 13;
    const BoundingBox at{a.x_min + tx, a.y_min + ty, a.x_max + tx, a.y_max + ty};
    const BoundingBox bt{b.x_min + tx, b.y_min + ty, b.x_max + tx, b.y_max + ty};
    CHECK(iou(at, bt) == v);
  }
}
