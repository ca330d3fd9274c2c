#pragma once

#include <algorithm>

namespace motlab {

// Axis-aligned pixel box, (left, top) origin, y grows downward.
struct Box {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double cx() const { return left + 0.5 * width; }
  double cy() const { return top + 0.5 * height; }
  double area() const { return width * height; }
  bool empty() const { return width <= 0.0 || height <= 0.0; }

  bool contains(double x, double y) const {
    return x >= left && x < right() && y >= top && y < bottom();
  }
};

inline Box intersect(const Box& a, const Box& b) {
  const double l = std::max(a.left, b.left);
  const double t = std::max(a.top, b.top);
  const double r = std::min(a.right(), b.right());
  const double bt = std::min(a.bottom(), b.bottom());
  if (r <= l || bt <= t) return Box{};
  return Box{l, t, r - l, bt - t};
}

inline Box clip_to_image(const Box& b, int width, int height) {
  return intersect(b, Box{0.0, 0.0, static_cast<double>(width), static_cast<double>(height)});
}

// Intersection over union; 0 when the union has zero area.
inline double iou(const Box& a, const Box& b) {
  const Box inter = intersect(a, b);
  const double ia = inter.area();
  const double ua = a.area() + b.area() - ia;
  if (ua <= 0.0) return 0.0;
  return ia / ua;
}

}  // namespace motlab
