#pragma once

#include <cmath>

namespace waverec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Axis-aligned open rectangle (xmin, xmax) x (ymin, ymax).
struct Rect {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool valid() const { return xmax > xmin && ymax > ymin; }

  /// True when `inner` lies strictly inside this rectangle.
  bool strictly_contains(const Rect& inner) const {
    return inner.xmin > xmin && inner.xmax < xmax && inner.ymin > ymin && inner.ymax < ymax;
  }
};

struct Circle {
  Point2 center;
  double radius = 0.0;

  double signed_distance(Point2 p) const { return norm(p - center) - radius; }
};

}  // namespace waverec
