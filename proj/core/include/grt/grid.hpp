#pragma once
// Cartesian node grid over the bounding square of the disc, fields on it, masked
// finite differences, and cubic Lagrange interpolation with extrapolated ghost
// values outside the disc (needed so interpolation stencils near the rim are
// fully populated).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "grt/common.hpp"

namespace grt {

struct SpatialGrid {
  int nx = 0, ny = 0;
  double radius = 1.0;
  double x0 = -1.0, y0 = -1.0, dx = 0.0, dy = 0.0;

  SpatialGrid() = default;
  SpatialGrid(int nx_, int ny_, double radius_)
      : nx(nx_), ny(ny_), radius(radius_), x0(-radius_), y0(-radius_) {
    if (nx < 8 || ny < 8) throw error(errc::config, "grid must be at least 8x8");
    dx = 2.0 * radius / (nx - 1);
    dy = 2.0 * radius / (ny - 1);
  }

  double x(int i) const { return x0 + i * dx; }
  double y(int j) const { return y0 + j * dy; }
  int size() const { return nx * ny; }
  int idx(int i, int j) const { return j * nx + i; }

  // Inside the closed disc; tolerance keeps the four rim nodes on the axes in.
  bool inside(int i, int j) const {
    double r2 = sqr(x(i)) + sqr(y(j));
    return r2 <= sqr(radius) * (1.0 + 1e-12);
  }

  double cell_area() const { return dx * dy; }

  bool same_shape(const SpatialGrid& o) const {
    return nx == o.nx && ny == o.ny && radius == o.radius;
  }
};

template <class T>
struct GridField {
  SpatialGrid grid;
  std::vector<T> v;

  GridField() = default;
  explicit GridField(const SpatialGrid& g, T fill = T{}) : grid(g), v(g.size(), fill) {}

  T& operator()(int i, int j) { return v[grid.idx(i, j)]; }
  const T& operator()(int i, int j) const { return v[grid.idx(i, j)]; }
};

using ScalarField = GridField<double>;
using CScalarField = GridField<cplx>;

// Complex 1-form in Cartesian chart components (alpha = a1 dx + a2 dy).
struct OneFormField {
  CScalarField a1, a2;
};

// Scalar/1-form pair: the natural unknown of the transforms here.
struct PairField {
  CScalarField f;
  OneFormField alpha;
};

// --- inside-disc mask ------------------------------------------------------

inline std::vector<uint8_t> inside_mask(const SpatialGrid& g) {
  std::vector<uint8_t> m(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (g.inside(i, j)) m[g.idx(i, j)] = 1;
  return m;
}

// --- cubic Lagrange stencils -------------------------------------------------

struct CubicStencil {
  int idx[4];
  double w[4];
};

// 4-point Lagrange stencil along one axis: n nodes at x0 + k*dx. The base is
// clamped so all four nodes exist; weights are the Lagrange basis evaluated at
// the (possibly off-center) local coordinate, which keeps the rule exact on
// cubics everywhere including next to the array ends.
inline CubicStencil cubic_stencil(double x0, double dx, int n, double x) {
  double u = (x - x0) / dx;
  int cell = (int)std::floor(u);
  int base = std::clamp(cell - 1, 0, n - 4);
  double s = u - base;  // position relative to base node, nodes at 0,1,2,3
  CubicStencil st;
  st.idx[0] = base;
  st.idx[1] = base + 1;
  st.idx[2] = base + 2;
  st.idx[3] = base + 3;
  st.w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  st.w[1] = s * (s - 2) * (s - 3) / 2.0;
  st.w[2] = -s * (s - 1) * (s - 3) / 2.0;
  st.w[3] = s * (s - 1) * (s - 2) / 6.0;
  return st;
}

// Periodic variant: n nodes at x0 + k*dx covering a period n*dx.
inline CubicStencil cubic_stencil_periodic(double x0, double dx, int n, double x) {
  double u = (x - x0) / dx;
  double un = u - n * std::floor(u / n);
  // Rounding can land exactly on n (e.g. u = -1e-16 with large n); rewrap
  // before flooring or the local coordinate s drifts a full period.
  if (un >= n) un -= n;
  if (un < 0.0) un = 0.0;
  int cell = (int)std::floor(un);
  double s = un - cell + 1.0;  // nodes at offsets -1,0,1,2 from cell
  CubicStencil st;
  for (int k = 0; k < 4; ++k) {
    int ii = cell - 1 + k;
    ii %= n;
    if (ii < 0) ii += n;
    st.idx[k] = ii;
  }
  st.w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  st.w[1] = s * (s - 2) * (s - 3) / 2.0;
  st.w[2] = -s * (s - 1) * (s - 3) / 2.0;
  st.w[3] = s * (s - 1) * (s - 2) / 6.0;
  return st;
}

// --- ghost extrapolation -----------------------------------------------------

// Extends a field defined on the inside nodes a few cells past the rim by
// quadratic extrapolation (rows first, then columns on still-unset nodes).
// Interpolation stencils for points inside the disc never reach deeper than
// two cells outside, three are filled for margin.
template <class T>
void fill_ghost_values(const SpatialGrid& g, const std::vector<uint8_t>& mask,
                       std::vector<T>& v) {
  constexpr int depth = 3;
  std::vector<uint8_t> have = mask;

  auto extrapolate = [](T a, T b, T c, int k) {
    // values at offsets 0,1,2 from the run end; extrapolate to offset -k
    double s = -double(k);
    double w0 = (s - 1) * (s - 2) / 2.0;
    double w1 = -s * (s - 2);
    double w2 = s * (s - 1) / 2.0;
    return T(w0 * a + w1 * b + w2 * c);
  };

  auto pass = [&](bool rows) {
    int outer = rows ? g.ny : g.nx;
    int inner = rows ? g.nx : g.ny;
    auto at = [&](int o, int i) -> int { return rows ? g.idx(i, o) : g.idx(o, i); };
    for (int o = 0; o < outer; ++o) {
      int lo = -1, hi = -1;
      for (int i = 0; i < inner; ++i)
        if (mask[at(o, i)]) {
          if (lo < 0) lo = i;
          hi = i;
        }
      if (lo < 0 || hi - lo < 2) continue;  // need 3 source nodes
      for (int k = 1; k <= depth; ++k) {
        int il = lo - k, ih = hi + k;
        if (il >= 0 && !have[at(o, il)]) {
          v[at(o, il)] = extrapolate(v[at(o, lo)], v[at(o, lo + 1)], v[at(o, lo + 2)], k);
          have[at(o, il)] = 1;
        }
        if (ih < inner && !have[at(o, ih)]) {
          v[at(o, ih)] = extrapolate(v[at(o, hi)], v[at(o, hi - 1)], v[at(o, hi - 2)], k);
          have[at(o, ih)] = 1;
        }
      }
    }
  };
  pass(true);
  pass(false);
}

// --- scalar interpolant ------------------------------------------------------

template <class T>
class ScalarInterpolant {
public:
  ScalarInterpolant(const SpatialGrid& g, const std::vector<T>& values)
      : g_(g), v_(values) {
    auto m = inside_mask(g);
    fill_ghost_values(g, m, v_);
  }
  explicit ScalarInterpolant(const GridField<T>& f) : ScalarInterpolant(f.grid, f.v) {}

  T operator()(double x, double y) const {
    CubicStencil sx = cubic_stencil(g_.x0, g_.dx, g_.nx, x);
    CubicStencil sy = cubic_stencil(g_.y0, g_.dy, g_.ny, y);
    T acc{};
    for (int jy = 0; jy < 4; ++jy) {
      T row{};
      const T* base = &v_[sy.idx[jy] * g_.nx];
      for (int jx = 0; jx < 4; ++jx) row += T(sx.w[jx]) * base[sx.idx[jx]];
      acc += T(sy.w[jy]) * row;
    }
    return acc;
  }

  const SpatialGrid& grid() const { return g_; }

private:
  SpatialGrid g_;
  std::vector<T> v_;
};

// --- masked finite differences ----------------------------------------------

// d/dx with central differences inside, one-sided second order at run ends.
template <class T>
GridField<T> ddx_masked(const GridField<T>& f, const std::vector<uint8_t>& m) {
  const SpatialGrid& g = f.grid;
  GridField<T> out(g);
  double h = g.dx;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int c = g.idx(i, j);
      if (!m[c]) continue;
      bool L = i > 0 && m[c - 1], R = i + 1 < g.nx && m[c + 1];
      if (L && R)
        out.v[c] = (f.v[c + 1] - f.v[c - 1]) / (2 * h);
      else if (R && i + 2 < g.nx && m[c + 2])
        out.v[c] = (T(-3.0) * f.v[c] + T(4.0) * f.v[c + 1] - f.v[c + 2]) / (2 * h);
      else if (L && i - 2 >= 0 && m[c - 2])
        out.v[c] = (T(3.0) * f.v[c] - T(4.0) * f.v[c - 1] + f.v[c - 2]) / (2 * h);
      else if (R)
        out.v[c] = (f.v[c + 1] - f.v[c]) / h;
      else if (L)
        out.v[c] = (f.v[c] - f.v[c - 1]) / h;
    }
  return out;
}

template <class T>
GridField<T> ddy_masked(const GridField<T>& f, const std::vector<uint8_t>& m) {
  const SpatialGrid& g = f.grid;
  GridField<T> out(g);
  double h = g.dy;
  int s = g.nx;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int c = g.idx(i, j);
      if (!m[c]) continue;
      bool D = j > 0 && m[c - s], U = j + 1 < g.ny && m[c + s];
      if (D && U)
        out.v[c] = (f.v[c + s] - f.v[c - s]) / (2 * h);
      else if (U && j + 2 < g.ny && m[c + 2 * s])
        out.v[c] = (T(-3.0) * f.v[c] + T(4.0) * f.v[c + s] - f.v[c + 2 * s]) / (2 * h);
      else if (D && j - 2 >= 0 && m[c - 2 * s])
        out.v[c] = (T(3.0) * f.v[c] - T(4.0) * f.v[c - s] + f.v[c - 2 * s]) / (2 * h);
      else if (U)
        out.v[c] = (f.v[c + s] - f.v[c]) / h;
      else if (D)
        out.v[c] = (f.v[c] - f.v[c - s]) / h;
    }
  return out;
}

}  // namespace grt
