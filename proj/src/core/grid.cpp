#include "core/grid.hpp"

#include <limits>

namespace caplab {

size_t VoxelGrid::count_occupied() const {
  size_t n = 0;
  for (uint64_t w : bits) n += size_t(__builtin_popcountll(w));
  return n;
}

bool rasterize(const DomainSpec& spec, int g, VoxelGrid* out, std::string* err) {
  if (g < spec.scale || g > kMaxScale) {
    if (err)
      *err = "grid scale 2^-" + std::to_string(g) +
             " coarser than coordinate scale 2^-" + std::to_string(spec.scale);
    return false;
  }
  VoxelGrid grid;
  grid.dim = spec.dim;
  grid.g = g;
  grid.h = std::ldexp(1.0, -g);
  Coord lo, hi;
  spec_bbox(spec, &lo, &hi);
  const int lift = g - spec.scale;
  i128 total = 1;
  for (int d = 0; d < spec.dim; ++d) {
    grid.origin_units[d] = lo[d] << lift;
    grid.origin[d] = std::ldexp(double(grid.origin_units[d]), -g);
    grid.dims[d] = int((hi[d] - lo[d]) << lift);
    total *= grid.dims[d];
  }
  if (total > (i128(1) << 31)) {
    if (err) *err = "raster would exceed 2^31 cells; pick a coarser grid";
    return false;
  }
  grid.alloc_bits();

  // Fill by exact integer ranges per box: cell i on axis d is covered by the
  // open box interior iff lo < center < hi, i.e. lo*2^lift <= origin+i and
  // origin+i+1 <= hi*2^lift (centers are interior to [k, k+1) cells).
  // Membership in the union needs the orthant test only on faces; centers
  // never sit on faces here, so covered-by-some-open-box is exact.
  for (const auto& b : spec.boxes) {
    int lo_i[3] = {0, 0, 0}, hi_i[3] = {0, 0, 0};  // inclusive/exclusive
    bool empty = false;
    for (int d = 0; d < spec.dim; ++d) {
      const i64 a = (b.lo[d] << lift) - grid.origin_units[d];
      const i64 c = (b.hi[d] << lift) - grid.origin_units[d];
      lo_i[d] = int(std::max<i64>(a, 0));
      hi_i[d] = int(std::min<i64>(c, grid.dims[d]));
      if (lo_i[d] >= hi_i[d]) empty = true;
    }
    if (empty) continue;
    const int z0 = spec.dim == 3 ? lo_i[2] : 0;
    const int z1 = spec.dim == 3 ? hi_i[2] : 1;
    for (int iz = z0; iz < z1; ++iz)
      for (int iy = lo_i[1]; iy < hi_i[1]; ++iy)
        for (int ix = lo_i[0]; ix < hi_i[0]; ++ix)
          grid.set_occupied(grid.index(ix, iy, iz));
  }
  *out = grid;
  return true;
}

bool grid_connected(const VoxelGrid& grid) {
  const size_t n = grid.ncells();
  size_t start = n;
  for (size_t i = 0; i < n; ++i)
    if (grid.occupied(i)) { start = i; break; }
  if (start == n) return false;
  std::vector<uint8_t> seen(n, 0);
  std::vector<size_t> stack{start};
  seen[start] = 1;
  size_t visited = 0;
  while (!stack.empty()) {
    const size_t cur = stack.back();
    stack.pop_back();
    ++visited;
    int ix, iy, iz;
    grid.cell_coords(cur, &ix, &iy, &iz);
    const int deltas[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                              {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    const int nd = grid.dim == 3 ? 6 : 4;
    for (int k = 0; k < nd; ++k) {
      const int jx = ix + deltas[k][0], jy = iy + deltas[k][1],
                jz = iz + deltas[k][2];
      if (!grid.occupied(jx, jy, jz)) continue;
      const size_t j = grid.index(jx, jy, jz);
      if (!seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return visited == grid.count_occupied();
}

DistanceField distance_field(const VoxelGrid& grid, const BoundaryGeometry& bg) {
  DistanceField f;
  f.d.assign(grid.ncells(), std::numeric_limits<double>::quiet_NaN());
  const int qs = grid.g + 1;
  const double unit = std::ldexp(1.0, -qs);
  for (int iz = 0; iz < (grid.dim == 3 ? grid.dims[2] : 1); ++iz)
    for (int iy = 0; iy < grid.dims[1]; ++iy)
      for (int ix = 0; ix < grid.dims[0]; ++ix) {
        const size_t idx = grid.index(ix, iy, iz);
        if (!grid.occupied(idx)) continue;
        const Coord c = grid.center_units(ix, iy, iz);
        const i128 d2 = bg.dist2_point_units(c, qs);
        f.d[idx] = std::sqrt(double(d2)) * unit;
      }
  return f;
}

}  // namespace caplab
