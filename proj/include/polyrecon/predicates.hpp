#pragma once

// Exact 2D orientation and in-circle predicates. A floating-point filter
// answers the common case; uncertain cases are re-evaluated with
// non-overlapping floating-point expansions, which are exact.

#include <cmath>
#include <vector>

#include "polyrecon/vec.hpp"

namespace polyrecon::predicates {

namespace detail {

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// Components stored in increasing magnitude, non-overlapping, zeros dropped.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) c_.push_back(v);
  }

  static Expansion difference(double a, double b) {
    double x, y;
    two_sum(a, -b, x, y);
    Expansion e;
    if (y != 0.0) e.c_.push_back(y);
    if (x != 0.0) e.c_.push_back(x);
    return e;
  }

  Expansion& grow(double b) {
    std::vector<double> out;
    out.reserve(c_.size() + 1);
    double q = b;
    for (double e : c_) {
      double sum, err;
      two_sum(q, e, sum, err);
      if (err != 0.0) out.push_back(err);
      q = sum;
    }
    if (q != 0.0) out.push_back(q);
    c_ = std::move(out);
    return *this;
  }

  Expansion scaled(double b) const {
    Expansion out;
    for (double e : c_) {
      double p, err;
      two_product(e, b, p, err);
      out.grow(err);
      out.grow(p);
    }
    return out;
  }

  friend Expansion operator+(Expansion a, const Expansion& b) {
    for (double v : b.c_) a.grow(v);
    return a;
  }
  friend Expansion operator-(Expansion a, const Expansion& b) {
    for (double v : b.c_) a.grow(-v);
    return a;
  }
  friend Expansion operator*(const Expansion& a, const Expansion& b) {
    Expansion out;
    for (double v : b.c_) out = out + a.scaled(v);
    return out;
  }

  int sign() const {
    if (c_.empty()) return 0;
    return c_.back() > 0.0 ? 1 : -1;
  }

 private:
  std::vector<double> c_;
};

inline int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  const auto acx = Expansion::difference(a.x, c.x);
  const auto acy = Expansion::difference(a.y, c.y);
  const auto bcx = Expansion::difference(b.x, c.x);
  const auto bcy = Expansion::difference(b.y, c.y);
  return (acx * bcy - acy * bcx).sign();
}

inline int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const auto adx = Expansion::difference(a.x, d.x);
  const auto ady = Expansion::difference(a.y, d.y);
  const auto bdx = Expansion::difference(b.x, d.x);
  const auto bdy = Expansion::difference(b.y, d.y);
  const auto cdx = Expansion::difference(c.x, d.x);
  const auto cdy = Expansion::difference(c.y, d.y);
  const auto alift = adx * adx + ady * ady;
  const auto blift = bdx * bdx + bdy * bdy;
  const auto clift = cdx * cdx + cdy * cdy;
  const auto det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                   clift * (adx * bdy - ady * bdx);
  return det.sign();
}

}  // namespace detail

/// Sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise,
/// 0 collinear. Exact.
inline int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double errbound = 3.3306690738754716e-16 * (std::abs(detleft) + std::abs(detright));
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return detail::orient2d_exact(a, b, c);
}

/// +1 if d lies strictly inside the circle through counter-clockwise (a, b, c),
/// -1 if outside, 0 if cocircular. Exact.
inline int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double errbound = 1.1102230246251577e-15 * permanent;
  if (det > errbound) return 1;
  if (-det > errbound) return -1;
  return detail::incircle_exact(a, b, c, d);
}

}  // namespace polyrecon::predicates
