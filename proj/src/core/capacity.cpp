#include "capacity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

namespace caplab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double now_seconds() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

// compacted cell graph the solvers run on: only participating cells, +axis
// neighbor ids, plate roles baked into fixed values
struct SolveGraph {
  int dim = 2;
  double h = 0.0;
  double p = 2.0;
  double delta = 0.0;
  i64 n = 0;                      // compact cell count
  std::vector<int> nbr;           // n*dim, +axis neighbor compact id or -1
  std::vector<signed char> fixed; // 1 = plate cell
  std::vector<double> u;          // current value per compact cell
  std::vector<i64> raw;           // compact -> raw cell index
  std::vector<int> free_cells;    // compact ids, raw scan order
  std::vector<int> deg;           // occupied face neighbors (both signs)
};

double graph_energy(const SolveGraph& G) {
  const double hn = std::pow(G.h, G.dim);
  const double inv_h = 1.0 / G.h;
  const double d2 = G.delta * G.delta;
  double total = 0.0;
  for (i64 c = 0; c < G.n; ++c) {
    double gc = d2;
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      const double t = (G.u[f] - G.u[c]) * inv_h;
      gc += t * t;
    }
    total += hn * std::pow(gc, 0.5 * G.p);
  }
  return total;
}

// gradient over all compact cells (callers read only the free entries)
void graph_gradient(const SolveGraph& G, std::vector<double>* grad) {
  grad->assign(size_t(G.n), 0.0);
  const double hn = std::pow(G.h, G.dim);
  const double inv_h = 1.0 / G.h;
  const double d2 = G.delta * G.delta;
  std::vector<double>& gr = *grad;
  for (i64 c = 0; c < G.n; ++c) {
    double gc = d2;
    double t[3] = {0, 0, 0};
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      t[d] = (G.u[f] - G.u[c]) * inv_h;
      gc += t[d] * t[d];
    }
    const double w = hn * G.p * std::pow(gc, 0.5 * G.p - 1.0) * inv_h;
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      gr[f] += w * t[d];
      gr[c] -= w * t[d];
    }
  }
}

// ---- p = 2, delta = 0: graph-Laplacian PCG ------------------------------
//
// E = h^{n-2} * sum_edges (u_a - u_b)^2; Euler-Lagrange: L u = 0 on free
// cells with plate values as data.  Jacobi preconditioner = degree.

void apply_laplacian(const SolveGraph& G, const std::vector<double>& x,
                     std::vector<double>* y) {
  y->assign(size_t(G.n), 0.0);
  std::vector<double>& yy = *y;
  for (i64 c = 0; c < G.n; ++c)
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      const double t = x[c] - x[f];
      yy[c] += t;
      yy[f] -= t;
    }
}

bool pcg_p2(SolveGraph* G, double tol, long* iters, double* resid,
            std::string* err) {
  const i64 n = G->n;
  const size_t nf = G->free_cells.size();
  *iters = 0;
  *resid = 0.0;
  if (nf == 0) return true;

  // b = -(L u_plate) restricted to free cells
  std::vector<double> full(size_t(n), 0.0), tmp;
  for (i64 c = 0; c < n; ++c)
    if (G->fixed[c]) full[c] = G->u[c];
  apply_laplacian(*G, full, &tmp);
  std::vector<double> b(nf), x(nf, 0.0);
  double bnorm2 = 0.0;
  for (size_t i = 0; i < nf; ++i) {
    b[i] = -tmp[G->free_cells[i]];
    bnorm2 += b[i] * b[i];
  }
  if (bnorm2 == 0.0) {
    for (size_t i = 0; i < nf; ++i) G->u[G->free_cells[i]] = 0.0;
    return true;
  }

  auto apply_ff = [&](const std::vector<double>& in, std::vector<double>* out) {
    std::fill(full.begin(), full.end(), 0.0);
    for (size_t i = 0; i < nf; ++i) full[G->free_cells[i]] = in[i];
    apply_laplacian(*G, full, &tmp);
    out->resize(nf);
    for (size_t i = 0; i < nf; ++i) (*out)[i] = tmp[G->free_cells[i]];
  };

  std::vector<double> r = b, z(nf), pvec(nf), Ap;
  auto precond = [&](const std::vector<double>& rr, std::vector<double>* zz) {
    for (size_t i = 0; i < nf; ++i)
      (*zz)[i] = rr[i] / double(std::max(G->deg[G->free_cells[i]], 1));
  };
  precond(r, &z);
  pvec = z;
  double rz = 0.0;
  for (size_t i = 0; i < nf; ++i) rz += r[i] * z[i];

  const long cap = 500000;
  double rr2 = bnorm2;
  double hist[8] = {0};
  for (long it = 0; it < cap; ++it) {
    apply_ff(pvec, &Ap);
    double pAp = 0.0;
    for (size_t i = 0; i < nf; ++i) pAp += pvec[i] * Ap[i];
    if (pAp <= 0.0) {
      *err = "capacity: CG breakdown (operator not positive on search dir)";
      return false;
    }
    const double alpha = rz / pAp;
    rr2 = 0.0;
    for (size_t i = 0; i < nf; ++i) {
      x[i] += alpha * pvec[i];
      r[i] -= alpha * Ap[i];
      rr2 += r[i] * r[i];
    }
    *iters = it + 1;
    hist[it & 7] = std::sqrt(rr2 / bnorm2);
    if (rr2 <= tol * tol * bnorm2) break;
    precond(r, &z);
    double rz_new = 0.0;
    for (size_t i = 0; i < nf; ++i) rz_new += r[i] * z[i];
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < nf; ++i) pvec[i] = z[i] + beta * pvec[i];
  }
  *resid = std::sqrt(rr2 / bnorm2);
  if (rr2 > tol * tol * bnorm2) {
    std::ostringstream os;
    os << "capacity: CG did not reach tol; recent relative residuals:";
    for (int k = 0; k < 8; ++k) os << " " << hist[(*iters + 1 + k) & 7];
    *err = os.str();
    return false;
  }
  for (size_t i = 0; i < nf; ++i) G->u[G->free_cells[i]] = x[i];
  return true;
}

// ---- general p: preconditioned nonlinear CG (PR+) -----------------------

double sup_norm_free(const SolveGraph& G, const std::vector<double>& v) {
  double m = 0.0;
  for (int c : G.free_cells) m = std::max(m, std::fabs(v[c]));
  return m;
}

// lagged Jacobi weights: diagonal of the Hessian with the nonlinear factor
// frozen at the current iterate
void jacobi_weights(const SolveGraph& G, std::vector<double>* M) {
  M->assign(size_t(G.n), 1e-300);
  const double hn2 = std::pow(G.h, G.dim - 2);
  const double inv_h = 1.0 / G.h;
  const double d2 = G.delta * G.delta;
  std::vector<double>& m = *M;
  for (i64 c = 0; c < G.n; ++c) {
    double gc = d2;
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      const double t = (G.u[f] - G.u[c]) * inv_h;
      gc += t * t;
    }
    const double w = hn2 * G.p * std::pow(gc, 0.5 * G.p - 1.0);
    for (int d = 0; d < G.dim; ++d) {
      const int f = G.nbr[c * G.dim + d];
      if (f < 0) continue;
      m[c] += w;
      m[f] += w;
    }
  }
}

bool nlcg(SolveGraph* G, double tol, long* iters, double* grad_norm,
          std::string* err) {
  SolveGraph& g = *G;
  const size_t nf = g.free_cells.size();
  *iters = 0;
  if (nf == 0) {
    *grad_norm = 0.0;
    return true;
  }
  const double grad_goal = tol * std::pow(g.h, g.dim);
  const long cap = 20000;

  std::vector<double> grad, grad_prev, M, z(size_t(g.n), 0.0),
      dir(size_t(g.n), 0.0), u_trial(g.u);
  double E = graph_energy(g);
  graph_gradient(g, &grad);
  jacobi_weights(g, &M);
  for (int c : g.free_cells) z[c] = grad[c] / M[c];
  for (int c : g.free_cells) dir[c] = -z[c];
  double gz = 0.0;
  for (int c : g.free_cells) gz += grad[c] * z[c];

  double alpha_prev = 0.0;
  int stall = 0;
  for (long it = 0; it < cap; ++it) {
    *iters = it;
    *grad_norm = sup_norm_free(g, grad);
    if (*grad_norm < grad_goal) return true;

    double dphi0 = 0.0, dmax = 0.0;
    for (int c : g.free_cells) {
      dphi0 += grad[c] * dir[c];
      dmax = std::max(dmax, std::fabs(dir[c]));
    }
    bool steepest = false;
    if (!(dphi0 < 0.0)) {  // not a descent direction: restart
      for (int c : g.free_cells) dir[c] = -z[c];
      dphi0 = -gz;
      steepest = true;
      dmax = sup_norm_free(g, z);
    }
    if (dmax == 0.0) return true;

    double alpha = alpha_prev > 0.0 ? 2.0 * alpha_prev : -2.0 * E / dphi0;
    alpha = std::min(alpha, 1.0 / dmax);
    if (!(alpha > 0.0)) alpha = 1.0 / dmax;

    double E_new = 0.0;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int c : g.free_cells) u_trial[c] = g.u[c] + alpha * dir[c];
      std::swap(g.u, u_trial);
      E_new = graph_energy(g);
      std::swap(g.u, u_trial);
      if (E_new <= E + 1e-4 * alpha * dphi0) {
        ok = true;
        break;
      }
      // quadratic interpolation on phi, clamped backtracking
      const double denom = 2.0 * (E_new - E - dphi0 * alpha);
      double an = denom > 0.0 ? -dphi0 * alpha * alpha / denom : 0.5 * alpha;
      an = std::min(std::max(an, 0.1 * alpha), 0.5 * alpha);
      alpha = an;
    }
    if (!ok) {
      if (!steepest) {
        // retry once along steepest descent before declaring a floor
        for (int c : g.free_cells) dir[c] = -z[c];
        dphi0 = -gz;
        alpha = 1.0 / std::max(sup_norm_free(g, z), 1e-300);
        for (int ls = 0; ls < 60 && !ok; ++ls) {
          for (int c : g.free_cells) u_trial[c] = g.u[c] + alpha * dir[c];
          std::swap(g.u, u_trial);
          E_new = graph_energy(g);
          std::swap(g.u, u_trial);
          if (E_new <= E + 1e-4 * alpha * dphi0)
            ok = true;
          else
            alpha *= 0.25;
        }
      }
      if (!ok) return true;  // numerical floor; grad_norm reports the state
    }
    for (int c : g.free_cells) g.u[c] += alpha * dir[c];
    alpha_prev = alpha;
    const double relE = (E - E_new) / std::max(std::fabs(E_new), 1e-300);
    E = E_new;
    stall = relE < tol ? stall + 1 : 0;
    if (stall >= 3) {
      graph_gradient(g, &grad);
      *grad_norm = sup_norm_free(g, grad);
      *iters = it + 1;
      return true;
    }

    grad_prev = grad;
    graph_gradient(g, &grad);
    if ((it + 1) % 25 == 0) jacobi_weights(g, &M);
    double num = 0.0;
    for (int c : g.free_cells) {
      const double znew = grad[c] / M[c];
      num += znew * (grad[c] - grad_prev[c]);
      z[c] = znew;
    }
    const double beta = std::max(0.0, num / std::max(gz, 1e-300));
    gz = 0.0;
    for (int c : g.free_cells) gz += grad[c] * z[c];
    for (int c : g.free_cells) dir[c] = -z[c] + beta * dir[c];
  }
  graph_gradient(g, &grad);
  *grad_norm = sup_norm_free(g, grad);
  *err = "capacity: nonlinear CG hit the iteration cap (last iterate kept)";
  return false;
}

// clamp to [0,1]; truncation never increases the energy, so keep whichever
// evaluation is smaller (they differ only by roundoff)
double finish_value(SolveGraph* G) {
  const double before = graph_energy(*G);
  for (int c : G->free_cells)
    G->u[c] = std::min(1.0, std::max(0.0, G->u[c]));
  const double after = graph_energy(*G);
  return std::min(before, after);
}

bool build_graph(const VoxelGrid& grid, const std::vector<i64>& plate_e,
                 const std::vector<i64>& plate_f, double p, double delta,
                 SolveGraph* G, std::string* err) {
  const size_t ncells = grid.ncells();
  if (ncells > size_t(140) * 1000 * 1000) {
    *err = "capacity: grid exceeds the cell budget";
    return false;
  }
  std::vector<int> comp(ncells, -1);
  G->dim = grid.dim;
  G->h = grid.h;
  G->p = p;
  G->delta = delta;
  G->raw.clear();
  for (size_t i = 0; i < ncells; ++i)
    if (grid.occupied(i)) {
      comp[i] = int(G->raw.size());
      G->raw.push_back(i64(i));
    }
  G->n = i64(G->raw.size());
  G->nbr.assign(size_t(G->n) * grid.dim, -1);
  G->deg.assign(size_t(G->n), 0);
  G->fixed.assign(size_t(G->n), 0);
  G->u.assign(size_t(G->n), 0.0);
  G->free_cells.clear();
  const i64 stride[3] = {1, i64(grid.dims[0]),
                         i64(grid.dims[0]) * grid.dims[1]};
  for (i64 c = 0; c < G->n; ++c) {
    int ix, iy, iz;
    grid.cell_coords(size_t(G->raw[c]), &ix, &iy, &iz);
    const int iv[3] = {ix, iy, iz};
    for (int d = 0; d < grid.dim; ++d) {
      if (iv[d] + 1 >= grid.dims[d]) continue;
      const size_t o = size_t(G->raw[c] + stride[d]);
      if (!grid.occupied(o)) continue;
      G->nbr[c * grid.dim + d] = comp[o];
      ++G->deg[c];
      ++G->deg[comp[o]];
    }
  }
  for (i64 idx : plate_e) {
    if (idx < 0 || size_t(idx) >= ncells || comp[idx] < 0) {
      *err = "capacity: 0-plate cell is not occupied";
      return false;
    }
    G->fixed[comp[idx]] = 1;
    G->u[comp[idx]] = 0.0;
  }
  for (i64 idx : plate_f) {
    if (idx < 0 || size_t(idx) >= ncells || comp[idx] < 0) {
      *err = "capacity: 1-plate cell is not occupied";
      return false;
    }
    if (G->fixed[comp[idx]]) {
      *err = "capacity: plates intersect";
      return false;
    }
    G->fixed[comp[idx]] = 1;
    G->u[comp[idx]] = 1.0;
  }
  for (i64 c = 0; c < G->n; ++c)
    if (!G->fixed[c]) G->free_cells.push_back(int(c));
  return true;
}

void export_field(const SolveGraph& G, const VoxelGrid& grid,
                  PotentialField* f) {
  f->dim = grid.dim;
  for (int d = 0; d < 3; ++d) {
    f->dims[d] = grid.dims[d];
    f->origin[d] = grid.origin[d];
  }
  f->h = grid.h;
  f->u.assign(grid.ncells(), kNaN);
  for (i64 c = 0; c < G.n; ++c) f->u[size_t(G.raw[c])] = G.u[c];
}

}  // namespace

bool assemble(const DomainSpec& spec, const VoxelGrid& grid,
              const std::string& e_tag, const DyadicCube& q0, double p,
              double delta, Condenser* out, std::string* err) {
  if (grid.g < spec.scale) {
    *err = "capacity: assemble needs a dyadic grid refined to the spec scale";
    return false;
  }
  if (!(p > 1.0)) {
    *err = "capacity: need p > 1";
    return false;
  }
  if (delta < 0.0) {
    *err = "capacity: need delta >= 0";
    return false;
  }
  if (q0.gen > grid.g) {
    *err = "capacity: grid too coarse for the central cube";
    return false;
  }
  const TaggedSet* ts = nullptr;
  if (!e_tag.empty()) {
    ts = spec.find_tag(e_tag);
    if (!ts) {
      *err = "capacity: unknown tag '" + e_tag + "'";
      return false;
    }
  }
  // tag boxes and the cube, lifted to the center scale g+1
  std::vector<IBox> eboxes;
  if (ts) {
    const int sh = grid.g + 1 - spec.scale;
    for (const IBox& b : ts->boxes) {
      IBox lb = b;
      for (int d = 0; d < spec.dim; ++d) {
        lb.lo[d] <<= sh;
        lb.hi[d] <<= sh;
      }
      eboxes.push_back(lb);
    }
  }
  const IBox qbox = cube_box_at_scale(q0, spec.dim, grid.g + 1);

  out->grid = grid;
  out->p = p;
  out->delta = delta;
  out->plateE.clear();
  out->plateF.clear();
  for (int iz = 0; iz < grid.dims[2]; ++iz)
    for (int iy = 0; iy < grid.dims[1]; ++iy)
      for (int ix = 0; ix < grid.dims[0]; ++ix) {
        const size_t idx = grid.index(ix, iy, iz);
        if (!grid.occupied(idx)) continue;
        const Coord c = grid.center_units(ix, iy, iz);
        bool in_e = false;
        for (const IBox& b : eboxes) {
          bool in = true;
          for (int d = 0; d < spec.dim && in; ++d)
            if (c[d] < b.lo[d] || c[d] > b.hi[d]) in = false;
          if (in) {
            in_e = true;
            break;
          }
        }
        bool in_f = true;
        for (int d = 0; d < spec.dim && in_f; ++d)
          if (c[d] < qbox.lo[d] || c[d] > qbox.hi[d]) in_f = false;
        if (in_e && in_f) {
          *err = "capacity: 0-plate and central cube intersect";
          return false;
        }
        if (in_e) out->plateE.push_back(i64(idx));
        if (in_f) out->plateF.push_back(i64(idx));
      }
  if (out->plateF.empty()) {
    *err = "capacity: central cube rasterizes to zero cells";
    return false;
  }
  if (ts && !ts->boxes.empty() && out->plateE.empty()) {
    *err = "capacity: tagged set '" + e_tag + "' rasterizes to zero cells";
    return false;
  }
  return true;
}

bool energy(const Condenser& c, const PotentialField& u, double* out,
            std::string* err) {
  const VoxelGrid& grid = c.grid;
  if (u.u.size() != grid.ncells()) {
    *err = "capacity: field size does not match grid";
    return false;
  }
  for (i64 idx : c.plateE)
    if (!(std::fabs(u.u[size_t(idx)]) <= 1e-9)) {
      *err = "capacity: field violates the 0-plate";
      return false;
    }
  for (i64 idx : c.plateF)
    if (!(std::fabs(u.u[size_t(idx)] - 1.0) <= 1e-9)) {
      *err = "capacity: field violates the 1-plate";
      return false;
    }
  const double hn = std::pow(grid.h, grid.dim);
  const double inv_h = 1.0 / grid.h;
  const double d2 = c.delta * c.delta;
  const i64 stride[3] = {1, i64(grid.dims[0]),
                         i64(grid.dims[0]) * grid.dims[1]};
  double total = 0.0;
  for (size_t idx = 0; idx < grid.ncells(); ++idx) {
    if (!grid.occupied(idx)) continue;
    if (std::isnan(u.u[idx])) {
      *err = "capacity: field undefined on an occupied cell";
      return false;
    }
    int ix, iy, iz;
    grid.cell_coords(idx, &ix, &iy, &iz);
    const int iv[3] = {ix, iy, iz};
    double gc = d2;
    for (int d = 0; d < grid.dim; ++d) {
      if (iv[d] + 1 >= grid.dims[d]) continue;
      const size_t o = idx + size_t(stride[d]);
      if (!grid.occupied(o)) continue;
      const double t = (u.u[o] - u.u[idx]) * inv_h;
      gc += t * t;
    }
    total += hn * std::pow(gc, 0.5 * c.p);
  }
  *out = total;
  return true;
}

bool energy_gradient(const Condenser& c, const PotentialField& u,
                     std::vector<double>* grad, std::string* err) {
  const VoxelGrid& grid = c.grid;
  if (u.u.size() != grid.ncells()) {
    *err = "capacity: field size does not match grid";
    return false;
  }
  grad->assign(grid.ncells(), 0.0);
  const double hn = std::pow(grid.h, grid.dim);
  const double inv_h = 1.0 / grid.h;
  const double d2 = c.delta * c.delta;
  const i64 stride[3] = {1, i64(grid.dims[0]),
                         i64(grid.dims[0]) * grid.dims[1]};
  for (size_t idx = 0; idx < grid.ncells(); ++idx) {
    if (!grid.occupied(idx)) continue;
    int ix, iy, iz;
    grid.cell_coords(idx, &ix, &iy, &iz);
    const int iv[3] = {ix, iy, iz};
    double gc = d2, t[3] = {0, 0, 0};
    size_t other[3] = {0, 0, 0};
    bool has[3] = {false, false, false};
    for (int d = 0; d < grid.dim; ++d) {
      if (iv[d] + 1 >= grid.dims[d]) continue;
      const size_t o = idx + size_t(stride[d]);
      if (!grid.occupied(o)) continue;
      t[d] = (u.u[o] - u.u[idx]) * inv_h;
      gc += t[d] * t[d];
      other[d] = o;
      has[d] = true;
    }
    const double w = hn * c.p * std::pow(gc, 0.5 * c.p - 1.0) * inv_h;
    for (int d = 0; d < grid.dim; ++d) {
      if (!has[d]) continue;
      (*grad)[other[d]] += w * t[d];
      (*grad)[idx] -= w * t[d];
    }
  }
  return true;
}

bool solve_p2(const Condenser& c, double tol, PotentialField* u,
              CapacityResult* out, std::string* err) {
  if (c.p != 2.0 || c.delta != 0.0) {
    *err = "capacity: solve_p2 requires p = 2 and delta = 0";
    return false;
  }
  if (tol <= 0.0) tol = 1e-10;
  const double t0 = now_seconds();
  SolveGraph G;
  if (!build_graph(c.grid, c.plateE, c.plateF, c.p, c.delta, &G, err))
    return false;
  out->h = c.grid.h;
  out->p = c.p;
  out->delta = c.delta;
  out->upper_bound = false;
  if (c.plateE.empty()) {
    // no 0-plate: u == 1 is admissible with zero energy
    for (i64 i = 0; i < G.n; ++i)
      if (!G.fixed[i]) G.u[i] = 1.0;
    out->value = 0.0;
    out->iterations = 0;
    out->grad_norm = 0.0;
  } else if (c.plateF.empty()) {
    out->value = 0.0;
    out->iterations = 0;
    out->grad_norm = 0.0;
  } else {
    long iters = 0;
    double resid = 0.0;
    if (!pcg_p2(&G, tol, &iters, &resid, err)) return false;
    out->value = finish_value(&G);
    out->iterations = iters;
    out->grad_norm = resid;
  }
  out->wall_seconds = now_seconds() - t0;
  if (u) export_field(G, c.grid, u);
  return true;
}

bool solve_p(const Condenser& c, double tol, PotentialField* u,
             CapacityResult* out, std::string* err) {
  if (!(c.p > 1.0)) {
    *err = "capacity: need p > 1";
    return false;
  }
  if (!(c.delta > 0.0)) {
    *err = "capacity: solve_p needs delta > 0";
    return false;
  }
  if (tol <= 0.0) tol = 1e-8;
  const double t0 = now_seconds();
  SolveGraph G;
  if (!build_graph(c.grid, c.plateE, c.plateF, c.p, c.delta, &G, err))
    return false;
  out->h = c.grid.h;
  out->p = c.p;
  out->delta = c.delta;
  out->upper_bound = false;
  if (c.plateE.empty() || c.plateF.empty()) {
    const double fill = c.plateE.empty() ? 1.0 : 0.0;
    for (i64 i = 0; i < G.n; ++i)
      if (!G.fixed[i]) G.u[i] = fill;
    out->value = graph_energy(G);  // the delta term keeps this positive
    out->iterations = 0;
    out->grad_norm = 0.0;
  } else {
    // warm start from the p = 2 harmonic solution
    G.p = 2.0;
    G.delta = 0.0;
    long it2 = 0;
    double resid = 0.0;
    if (!pcg_p2(&G, 1e-10, &it2, &resid, err)) return false;
    G.p = c.p;
    G.delta = c.delta;
    long iters = 0;
    double gn = 0.0;
    const bool ok = nlcg(&G, tol, &iters, &gn, err);
    out->value = finish_value(&G);
    out->iterations = it2 + iters;
    out->grad_norm = gn;
    if (!ok) {
      out->wall_seconds = now_seconds() - t0;
      if (u) export_field(G, c.grid, u);
      return false;
    }
  }
  out->wall_seconds = now_seconds() - t0;
  if (u) export_field(G, c.grid, u);
  return true;
}

// ---- window solves -------------------------------------------------------

bool windowed_capacity(const DomainSpec& spec, const WindowJob& job, int g,
                       double p, double delta, double tol, WindowMemo* memo,
                       CapacityResult* out, PotentialField* field,
                       std::string* err) {
  if (g < spec.scale) {
    *err = "capacity: window grid scale must refine the spec scale";
    return false;
  }
  if (g > kMaxScale - 2) {
    *err = "capacity: window grid scale exceeds the precision budget";
    return false;
  }
  if (job.window.empty()) {
    *err = "capacity: empty window";
    return false;
  }
  const int sh = g - spec.scale;
  auto lift = [&](const IBox& b) {
    IBox lb = b;
    for (int d = 0; d < spec.dim; ++d) {
      lb.lo[d] <<= sh;
      lb.hi[d] <<= sh;
    }
    return lb;
  };
  std::vector<IBox> win, pl0, pl1;
  for (const IBox& b : job.window) win.push_back(lift(b));
  for (const IBox& b : job.plate0) pl0.push_back(lift(b));
  for (const IBox& b : job.plate1) pl1.push_back(lift(b));

  // local raster: window bbox plus a one-cell ring so every window cell sees
  // the occupancy of all its face neighbors
  Coord blo{}, bhi{};
  for (int d = 0; d < spec.dim; ++d) {
    blo[d] = win[0].lo[d];
    bhi[d] = win[0].hi[d];
  }
  for (const IBox& b : win)
    for (int d = 0; d < spec.dim; ++d) {
      blo[d] = std::min(blo[d], b.lo[d]);
      bhi[d] = std::max(bhi[d], b.hi[d]);
    }
  i64 dims[3] = {1, 1, 1};
  i64 total = 1;
  for (int d = 0; d < spec.dim; ++d) {
    blo[d] -= 1;
    bhi[d] += 1;
    dims[d] = bhi[d] - blo[d];
    total *= dims[d];
    if (total > i64(140) * 1000 * 1000) {
      *err = "capacity: window exceeds the cell budget";
      return false;
    }
  }

  // roles: 0 outside-graph, 1 free, 2 plate0, 3 plate1/rim
  std::vector<signed char> role(size_t(total), 0);
  std::vector<uint8_t> occ(size_t(total), 0);
  auto in_boxes = [&](const std::vector<IBox>& bs, const Coord& c2) {
    // c2 at scale g+1, boxes at scale g: compare against doubled faces
    for (const IBox& b : bs) {
      bool in = true;
      for (int d = 0; d < spec.dim && in; ++d)
        if (c2[d] < 2 * b.lo[d] || c2[d] > 2 * b.hi[d]) in = false;
      if (in) return true;
    }
    return false;
  };
  // Occupancy from the spec boxes meeting the raster bbox only: every cell
  // center is odd at scale g+1 while every lifted box face is even, so a
  // center never lies on a face and closed membership in some nearby box is
  // the same as interior membership in the full union.
  std::vector<IBox> nearby;
  for (const IBox& b : spec.boxes) {
    IBox lb = lift(b);
    bool meet = true;
    for (int d = 0; d < spec.dim && meet; ++d)
      if (lb.hi[d] < blo[d] || lb.lo[d] > bhi[d]) meet = false;
    if (meet) nearby.push_back(lb);
  }
  {
    i64 iv[3] = {0, 0, 0};
    for (i64 idx = 0; idx < total; ++idx) {
      Coord c2{};
      for (int d = 0; d < spec.dim; ++d)
        c2[d] = ((blo[d] + iv[d]) << 1) + 1;
      bool occ_here = false;
      for (const IBox& b : nearby) {
        bool in = true;
        for (int d = 0; d < spec.dim && in; ++d)
          if (c2[d] < 2 * b.lo[d] || c2[d] > 2 * b.hi[d]) in = false;
        if (in) {
          occ_here = true;
          break;
        }
      }
      if (occ_here) {
        occ[size_t(idx)] = 1;
        if (in_boxes(win, c2)) {
          if (in_boxes(pl0, c2))
            role[size_t(idx)] = 2;
          else if (in_boxes(pl1, c2))
            role[size_t(idx)] = 3;
          else
            role[size_t(idx)] = 1;
        }
      }
      int d = 0;
      for (; d < spec.dim; ++d) {
        if (++iv[d] < dims[d]) break;
        iv[d] = 0;
      }
      if (d == spec.dim && idx + 1 < total) {
        *err = "capacity: window raster indexing failed";
        return false;
      }
    }
  }
  // rim detection: window cell with an occupied face neighbor outside
  const i64 stride[3] = {1, dims[0], dims[0] * dims[1]};
  bool e_on_rim = false;
  {
    i64 iv[3] = {0, 0, 0};
    for (i64 idx = 0; idx < total; ++idx) {
      if (role[size_t(idx)] != 0) {
        for (int d = 0; d < spec.dim; ++d)
          for (int sgn = -1; sgn <= 1; sgn += 2) {
            const i64 j = iv[d] + sgn;
            if (j < 0 || j >= dims[d]) continue;
            const i64 o = idx + sgn * stride[d];
            if (occ[size_t(o)] && role[size_t(o)] == 0) {
              if (role[size_t(idx)] == 2)
                e_on_rim = true;
              else
                role[size_t(idx)] = 3;
            }
          }
      }
      int d = 0;
      for (; d < spec.dim; ++d) {
        if (++iv[d] < dims[d]) break;
        iv[d] = 0;
      }
      if (d == spec.dim) break;
    }
  }
  if (e_on_rim) {
    *err = "capacity: window does not contain the 0-plate (plate touches "
           "the rim)";
    return false;
  }
  i64 n0 = 0, n1 = 0;
  for (i64 idx = 0; idx < total; ++idx) {
    if (role[size_t(idx)] == 2) ++n0;
    if (role[size_t(idx)] == 3) ++n1;
  }
  if (!job.plate0.empty() && n0 == 0) {
    *err = "capacity: 0-plate rasterizes to zero cells in the window";
    return false;
  }

  const double h = std::ldexp(1.0, -g);
  out->h = h;
  out->p = p;
  out->delta = delta;
  out->upper_bound = true;

  // memo lookup on the translated role bitmap
  std::string key;
  if (memo && !field) {
    char head[160];
    std::snprintf(head, sizeof head,
                  "d%d g%d p%.17g dl%.17g t%.17g |%lld,%lld,%lld|", spec.dim,
                  g, p, delta, tol, (long long)dims[0], (long long)dims[1],
                  (long long)dims[2]);
    key = head;
    std::string packed((size_t(total) + 3) / 4, '\0');
    for (i64 idx = 0; idx < total; ++idx)
      packed[size_t(idx) / 4] = char(
          packed[size_t(idx) / 4] | (role[size_t(idx)] << ((idx & 3) * 2)));
    key += packed;
    auto it = memo->map.find(key);
    if (it != memo->map.end()) {
      ++memo->hits;
      *out = it->second;
      return true;
    }
  }

  // compact graph over window cells only (see header for the extension
  // argument that makes this an upper bound)
  VoxelGrid local;
  local.dim = spec.dim;
  local.h = h;
  local.g = g;
  for (int d = 0; d < 3; ++d) {
    local.dims[d] = int(d < spec.dim ? dims[d] : 1);
    local.origin[d] = d < spec.dim ? std::ldexp(double(blo[d]), -g) : 0.0;
  }
  for (int d = 0; d < spec.dim; ++d) local.origin_units[d] = blo[d];
  local.alloc_bits();
  std::vector<i64> pe, pf;
  for (i64 idx = 0; idx < total; ++idx) {
    if (role[size_t(idx)] == 0) continue;
    local.set_occupied(size_t(idx));
    if (role[size_t(idx)] == 2) pe.push_back(idx);
    if (role[size_t(idx)] == 3) pf.push_back(idx);
  }
  Condenser cond;
  cond.grid = std::move(local);
  cond.plateE = std::move(pe);
  cond.plateF = std::move(pf);
  cond.p = p;
  cond.delta = delta;
  CapacityResult inner;
  bool ok;
  if (p == 2.0 && delta == 0.0)
    ok = solve_p2(cond, tol, field, &inner, err);
  else
    ok = solve_p(cond, tol, field, &inner, err);
  if (!ok) return false;
  out->value = inner.value;
  out->iterations = inner.iterations;
  out->grad_norm = inner.grad_norm;
  out->wall_seconds = inner.wall_seconds;

  if (memo && !field) {
    const size_t kMemoCap = size_t(512) * 1024 * 1024;
    if (memo->bytes + key.size() < kMemoCap) {
      memo->bytes += key.size() + sizeof(CapacityResult);
      memo->map.emplace(std::move(key), *out);
    }
  }
  return true;
}

// ---- persistence ---------------------------------------------------------

bool write_field(const PotentialField& f, const std::string& path,
                 std::string* err) {
  const uint16_t probe = 1;
  if (*reinterpret_cast<const uint8_t*>(&probe) != 1) {
    *err = "field io: big-endian hosts are not supported";
    return false;
  }
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) {
    *err = "field io: cannot open '" + path + "' for writing";
    return false;
  }
  std::fprintf(fp, "caplab-field v1\n");
  std::fprintf(fp, "dim %d\n", f.dim);
  std::fprintf(fp, "dims");
  for (int d = 0; d < f.dim; ++d)
    std::fprintf(fp, " %lld", (long long)f.dims[d]);
  std::fprintf(fp, "\n");
  std::fprintf(fp, "h %.17g\n", f.h);
  std::fprintf(fp, "origin");
  for (int d = 0; d < f.dim; ++d) std::fprintf(fp, " %.17g", f.origin[d]);
  std::fprintf(fp, "\n");
  std::fprintf(fp, "data\n");
  const size_t wrote =
      std::fwrite(f.u.data(), sizeof(double), f.u.size(), fp);
  std::fclose(fp);
  if (wrote != f.u.size()) {
    *err = "field io: short write to '" + path + "'";
    return false;
  }
  return true;
}

bool read_field(const std::string& path, PotentialField* f,
                std::string* err) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) {
    *err = "field io: cannot open '" + path + "'";
    return false;
  }
  char line[512];
  auto fail = [&](const char* m) {
    std::fclose(fp);
    *err = std::string("field io: ") + m;
    return false;
  };
  if (!std::fgets(line, sizeof line, fp) ||
      std::strcmp(line, "caplab-field v1\n") != 0)
    return fail("bad header");
  f->dims = {1, 1, 1};
  f->origin = {0, 0, 0};
  bool saw_data = false;
  while (std::fgets(line, sizeof line, fp)) {
    if (std::strcmp(line, "data\n") == 0) {
      saw_data = true;
      break;
    }
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "dim") {
      if (!(ls >> f->dim) || f->dim < 1 || f->dim > 3)
        return fail("bad dim");
    } else if (kw == "dims") {
      for (int d = 0; d < f->dim; ++d)
        if (!(ls >> f->dims[d]) || f->dims[d] < 1) return fail("bad dims");
    } else if (kw == "h") {
      if (!(ls >> f->h)) return fail("bad h");
    } else if (kw == "origin") {
      for (int d = 0; d < f->dim; ++d)
        if (!(ls >> f->origin[d])) return fail("bad origin");
    } else {
      return fail("unknown header keyword");
    }
  }
  if (!saw_data) return fail("missing data section");
  size_t total = 1;
  for (int d = 0; d < f->dim; ++d) total *= size_t(f->dims[d]);
  f->u.assign(total, kNaN);
  const size_t got = std::fread(f->u.data(), sizeof(double), total, fp);
  std::fclose(fp);
  if (got != total) return fail("truncated data");
  return true;
}

}  // namespace caplab
