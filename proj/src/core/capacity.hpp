#pragma once
// Discrete condenser p-capacity on the voxel grid.
//
// Energy of a cell field u:  sum over occupied cells of
//   h^n * (|grad_h u|^2 + delta^2)^(p/2),
// grad_h = forward differences to the +axis occupied neighbor, missing
// neighbor contributes 0 (natural boundary condition on the domain wall).
// Plates fix u: plateE -> 0, plateF -> 1; the minimizer over the free cells
// is the discrete capacity.  p = 2, delta = 0 is a graph-Laplacian linear
// system (preconditioned CG); general p > 1 with delta > 0 is solved
// by preconditioned nonlinear CG started from the p = 2 solution.
//
// windowed_capacity solves on a sub-window whose rim is clamped to 1; the
// clamped solution extends by the constant 1 to an admissible global field
// with identical energy, so the returned value is a certified upper bound
// for the global capacity (it is flagged as such).

#include <string>
#include <unordered_map>
#include <vector>

#include "domain.hpp"
#include "grid.hpp"
#include "whitney.hpp"

namespace caplab {

struct Condenser {
  VoxelGrid grid;
  std::vector<i64> plateE;  // raw cell indices, u = 0
  std::vector<i64> plateF;  // raw cell indices, u = 1
  double p = 2.0;
  double delta = 0.0;
};

// u per raw grid cell, row-major (x fastest); NaN marks cells that do not
// participate (unoccupied, or outside a solve window)
struct PotentialField {
  int dim = 2;
  std::array<i64, 3> dims{1, 1, 1};
  double h = 0.0;
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::vector<double> u;
};

struct CapacityResult {
  double value = 0.0;
  double h = 0.0;
  double p = 2.0;
  double delta = 0.0;
  long iterations = 0;
  double grad_norm = 0.0;  // final sup-norm of the energy gradient
  double wall_seconds = 0.0;
  bool upper_bound = false;  // set by windowed solves
};

// plateE = occupied cells with center in the tagged boxes (empty tag name ->
// empty plate); plateF = occupied cells with center in the closed cube q0
bool assemble(const DomainSpec& spec, const VoxelGrid& grid,
              const std::string& e_tag, const DyadicCube& q0, double p,
              double delta, Condenser* out, std::string* err);

// energy of a given field; rejects fields that violate plate values
bool energy(const Condenser& c, const PotentialField& u, double* out,
            std::string* err);

// analytic gradient of the energy wrt every occupied cell (0 elsewhere)
bool energy_gradient(const Condenser& c, const PotentialField& u,
                     std::vector<double>* grad, std::string* err);

// p = 2, delta = 0: preconditioned conjugate gradients on the Euler-Lagrange
// system, relative residual <= tol (default 1e-10 when tol <= 0)
bool solve_p2(const Condenser& c, double tol, PotentialField* u,
              CapacityResult* out, std::string* err);

// general p > 1, delta > 0: preconditioned nonlinear CG (PR+) with
// Armijo backtracking, started from the p = 2 solution; stops on gradient
// sup-norm < tol*h^n or on stalled relative energy decrease (3 consecutive
// iterations below tol; default tol 1e-8 when tol <= 0).  The final
// gradient norm is reported either way.
bool solve_p(const Condenser& c, double tol, PotentialField* u,
             CapacityResult* out, std::string* err);

// Window solve.  Cells participate when occupied in `spec` and centered in
// the closed union of `window`; u = 0 on cells centered in plate0 boxes,
// u = 1 on cells centered in plate1 boxes and on every rim cell (a window
// cell with an occupied face neighbor outside the window).  plate0 cells on
// the rim mean the window fails to contain the 0-plate -> rejection.
struct WindowJob {
  std::vector<IBox> window;  // at spec.scale
  std::vector<IBox> plate0;
  std::vector<IBox> plate1;  // optional explicit 1-plate (e.g. central cube)
};

// memo for congruent windows: keyed by the translated role bitmap
struct WindowMemo {
  std::unordered_map<std::string, CapacityResult> map;
  size_t bytes = 0;
  size_t hits = 0;
};

bool windowed_capacity(const DomainSpec& spec, const WindowJob& job, int g,
                       double p, double delta, double tol, WindowMemo* memo,
                       CapacityResult* out, PotentialField* field,
                       std::string* err);

// flat binary persistence: text header, then dims-product little-endian
// 64-bit floats
bool write_field(const PotentialField& f, const std::string& path,
                 std::string* err);
bool read_field(const std::string& path, PotentialField* f, std::string* err);

}  // namespace caplab
