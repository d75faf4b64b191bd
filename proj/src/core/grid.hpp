#pragma once
// Voxel rasterization of a DomainSpec and per-cell exact distances to the
// boundary. Grids created by rasterize() are dyadic (h = 2^-g, g >= scale),
// which keeps every cell center off every box face: centers have odd
// coordinates at scale g+1 while faces have even ones.
//
// Grids can also be built directly (arbitrary real h, explicit occupancy)
// for solver tests whose geometry is not dyadic.
#include "core/boundary.hpp"
#include "core/domain.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace caplab {

struct VoxelGrid {
  int dim = 2;
  double h = 0;
  int g = -1;            // h == 2^-g when >= 0 (dyadic grid)
  Coord origin_units{};  // at scale g, only meaningful when g >= 0
  std::array<double, 3> origin{};  // lower corner of cell (0,0,0)
  std::array<int, 3> dims{1, 1, 1};
  std::vector<uint64_t> bits;

  size_t ncells() const {
    return size_t(dims[0]) * size_t(dims[1]) * size_t(dims[2]);
  }
  size_t index(int ix, int iy, int iz) const {
    return size_t(ix) + size_t(dims[0]) * (size_t(iy) + size_t(dims[1]) * iz);
  }
  bool occupied(size_t idx) const {
    return (bits[idx >> 6] >> (idx & 63)) & 1;
  }
  bool occupied(int ix, int iy, int iz) const {
    if (ix < 0 || iy < 0 || iz < 0 || ix >= dims[0] || iy >= dims[1] ||
        iz >= dims[2])
      return false;
    return occupied(index(ix, iy, iz));
  }
  void set_occupied(size_t idx, bool v = true) {
    if (v)
      bits[idx >> 6] |= uint64_t(1) << (idx & 63);
    else
      bits[idx >> 6] &= ~(uint64_t(1) << (idx & 63));
  }
  void alloc_bits() { bits.assign((ncells() + 63) / 64, 0); }

  void cell_coords(size_t idx, int* ix, int* iy, int* iz) const {
    *ix = int(idx % size_t(dims[0]));
    *iy = int((idx / size_t(dims[0])) % size_t(dims[1]));
    *iz = int(idx / (size_t(dims[0]) * size_t(dims[1])));
  }
  // cell center at scale g+1 (dyadic grids only)
  Coord center_units(int ix, int iy, int iz) const {
    Coord c{};
    const int iv[3] = {ix, iy, iz};
    for (int d = 0; d < dim; ++d) c[d] = ((origin_units[d] + iv[d]) << 1) + 1;
    return c;
  }
  std::array<double, 3> center(int ix, int iy, int iz) const {
    std::array<double, 3> c{};
    const int iv[3] = {ix, iy, iz};
    for (int d = 0; d < dim; ++d) c[d] = origin[d] + (iv[d] + 0.5) * h;
    return c;
  }
  size_t count_occupied() const;
};

// Raster at h = 2^-g. Fails (returns false) when g < spec.scale.
bool rasterize(const DomainSpec& spec, int g, VoxelGrid* out, std::string* err);

// One face-connected component over occupied cells?
bool grid_connected(const VoxelGrid& grid);

struct DistanceField {
  // d > 0 for occupied cells, quiet NaN elsewhere.
  std::vector<double> d;
};

// Exact center-to-boundary distances for every occupied cell (dyadic grids).
DistanceField distance_field(const VoxelGrid& grid, const BoundaryGeometry& bg);

}  // namespace caplab
