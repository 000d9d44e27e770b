#pragma once

// Finite-difference control-to-state maps on the unit interval with
// homogeneous Dirichlet data:
//
//   * the nonsmooth semilinear elliptic equation  -y'' + max(0, y) = u,
//     solved by a semismooth Newton method;
//   * the parabolic obstacle problem  y_t - y'' >= B u,  y >= psi,
//     with complementarity, discretized by implicit Euler in time and
//     projected Gauss-Seidel per step, observed at the final time.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "tracklab/control_map.hpp"

namespace tracklab {

struct Mesh1D {
  Index n;  // interior nodes
  double h;

  explicit Mesh1D(Index interior_nodes) : n(interior_nodes), h(1.0 / static_cast<double>(interior_nodes + 1)) {
    require(n >= 2, "mesh: at least two interior nodes are required");
  }

  double node(Index i) const { return static_cast<double>(i + 1) * h; }

  Vector nodes() const {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = node(i);
    return x;
  }

  /// Nodal samples of f on the interior nodes.
  template <typename F>
  Vector sample(F&& f) const {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = f(node(i));
    return v;
  }
};

inline Vector sine_profile(const Mesh1D& mesh, double amplitude = 1.0) {
  return mesh.sample([&](double x) { return amplitude * std::sin(std::numbers::pi * x); });
}

/// (-Delta_h y)_i = (-y_{i-1} + 2 y_i - y_{i+1}) / h^2 with zero boundary values.
inline Vector neg_laplacian(const Mesh1D& mesh, const Vector& y) {
  require(y.size() == mesh.n, "laplacian: vector length does not match mesh");
  const double inv_h2 = 1.0 / (mesh.h * mesh.h);
  Vector r(mesh.n);
  for (Index i = 0; i < mesh.n; ++i) {
    const double left = i > 0 ? y[i - 1] : 0.0;
    const double right = i + 1 < mesh.n ? y[i + 1] : 0.0;
    r[i] = (2.0 * y[i] - left - right) * inv_h2;
  }
  return r;
}

/// Tridiagonal matrix; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  Vector lower, diag, upper;

  explicit Tridiagonal(Index n) : lower(Vector::Zero(n)), diag(Vector::Zero(n)), upper(Vector::Zero(n)) {}

  Index size() const { return diag.size(); }

  Vector operator*(const Vector& x) const {
    const Index n = size();
    Vector r(n);
    for (Index i = 0; i < n; ++i) {
      r[i] = diag[i] * x[i];
      if (i > 0) r[i] += lower[i] * x[i - 1];
      if (i + 1 < n) r[i] += upper[i] * x[i + 1];
    }
    return r;
  }

  /// -Delta_h + shift * I.
  static Tridiagonal laplacian(const Mesh1D& mesh, double shift = 0.0) {
    Tridiagonal t(mesh.n);
    const double inv_h2 = 1.0 / (mesh.h * mesh.h);
    t.lower.setConstant(-inv_h2);
    t.upper.setConstant(-inv_h2);
    t.diag.setConstant(2.0 * inv_h2 + shift);
    return t;
  }
};

/// Thomas algorithm. No pivoting; intended for diagonally dominant / M-matrix systems.
inline Vector solve_tridiagonal(const Tridiagonal& a, const Vector& rhs) {
  const Index n = a.size();
  require(rhs.size() == n, "tridiagonal solve: dimension mismatch");
  Vector c(n), d(n);
  double denom = a.diag[0];
  require(denom != 0.0, "tridiagonal solve: zero pivot");
  c[0] = n > 1 ? a.upper[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (Index i = 1; i < n; ++i) {
    denom = a.diag[i] - a.lower[i] * c[i - 1];
    require(denom != 0.0, "tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? a.upper[i] / denom : 0.0;
    d[i] = (rhs[i] - a.lower[i] * d[i - 1]) / denom;
  }
  Vector x(n);
  x[n - 1] = d[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// ---------------------------------------------------------------------------
// Semilinear elliptic map

struct SemilinearConfig {
  Mesh1D mesh;
  double newton_tol = 1e-10;
  int max_iter = 50;

  explicit SemilinearConfig(Mesh1D m, double tol = 1e-10, int iters = 50) : mesh(m), newton_tol(tol), max_iter(iters) {
    require(newton_tol > 0.0, "semilinear: newton_tol must be positive");
    require(max_iter >= 1, "semilinear: max_iter must be at least 1");
  }
};

struct SemilinearResult {
  Vector y;
  int iterations = 0;
  double residual = 0.0;  // sup-norm of -Delta_h y + max(0, y) - u
};

inline Vector semilinear_residual(const Mesh1D& mesh, const Vector& y, const Vector& u) {
  return neg_laplacian(mesh, y) + y.cwiseMax(0.0) - u;
}

/// Semismooth Newton for -Delta_h y + max(0, y) = u. The generalized
/// derivative of max(0, .) is 1 on {y >= 0} and 0 elsewhere.
///
/// The discrete system is piecewise linear, so once a Newton step keeps the
/// active set unchanged the iterate is exact up to rounding. That event is
/// accepted as convergence alongside the residual test, because on fine
/// meshes the residual of an exact solution is dominated by the 1/h^2
/// cancellation error in the stencil.
inline SemilinearResult solve_semilinear_detailed(const Vector& u, const SemilinearConfig& cfg) {
  const Mesh1D& mesh = cfg.mesh;
  require(u.size() == mesh.n, "semilinear: control must have one entry per interior node");
  require(u.allFinite(), "semilinear: control is not finite");

  SemilinearResult out;
  out.y = Vector::Zero(mesh.n);
  Vector residual = semilinear_residual(mesh, out.y, u);
  out.residual = residual.lpNorm<Eigen::Infinity>();
  if (out.residual <= cfg.newton_tol) return out;

  const Tridiagonal base = Tridiagonal::laplacian(mesh);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Tridiagonal jac = base;
    for (Index i = 0; i < mesh.n; ++i) jac.diag[i] += out.y[i] >= 0.0 ? 1.0 : 0.0;
    const Vector step = solve_tridiagonal(jac, -residual);
    Vector next = out.y + step;

    bool same_active_set = true;
    for (Index i = 0; i < mesh.n && same_active_set; ++i) same_active_set = (next[i] >= 0.0) == (out.y[i] >= 0.0);

    out.y = std::move(next);
    out.iterations = k;
    residual = semilinear_residual(mesh, out.y, u);
    out.residual = residual.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= cfg.newton_tol || same_active_set) return out;
  }
  throw ConvergenceError("semilinear: semismooth Newton did not converge in " + std::to_string(cfg.max_iter) +
                             " iterations (residual " + std::to_string(out.residual) + ")",
                         out.iterations, out.residual);
}

inline Vector solve_semilinear(const Vector& u, const SemilinearConfig& cfg) {
  return solve_semilinear_detailed(u, cfg).y;
}

/// u1 = 2(-Delta_h z + z), u2 = 2 Delta_h z. For z > 0 the discrete solution
/// operator sends them to 2z and -2z while their midpoint is z itself.
inline std::pair<Vector, Vector> counterexample_controls(const Vector& z, const Mesh1D& mesh) {
  require(z.size() == mesh.n, "counterexample controls: z must have one entry per interior node");
  for (Index i = 0; i < z.size(); ++i) {
    require(z[i] > 0.0, "counterexample controls: z must be positive on every interior node (node " +
                            std::to_string(i) + ")");
  }
  const Vector lz = neg_laplacian(mesh, z);
  return {2.0 * (lz + z), -2.0 * lz};
}

class SemilinearMap final : public ControlToStateMap {
 public:
  explicit SemilinearMap(SemilinearConfig cfg) : cfg_(cfg) {}
  std::string name() const override { return "semilinear1d"; }
  Index input_dim() const override { return cfg_.mesh.n; }
  Index output_dim() const override { return cfg_.mesh.n; }
  const SemilinearConfig& config() const { return cfg_; }

 protected:
  Vector evaluate(const Vector& u) const override { return solve_semilinear(u, cfg_); }

 private:
  SemilinearConfig cfg_;
};

// ---------------------------------------------------------------------------
// Obstacle LCP and the parabolic obstacle map

struct LcpResult {
  Vector y;
  int iterations = 0;
  double residual = 0.0;
};

/// Natural residual max_i |min(y_i - psi_i, (M y + q)_i)|.
inline double lcp_residual(const Tridiagonal& M, const Vector& q, const Vector& psi, const Vector& y) {
  const Vector w = M * y + q;
  double r = 0.0;
  for (Index i = 0; i < y.size(); ++i) r = std::max(r, std::abs(std::min(y[i] - psi[i], w[i])));
  return r;
}

/// Projected Gauss-Seidel for: y >= psi, M y + q >= 0, (y - psi)^T (M y + q) = 0.
inline LcpResult solve_obstacle_lcp(const Tridiagonal& M, const Vector& q, const Vector& psi, double tol,
                                    int max_iter, const Vector* initial = nullptr) {
  const Index n = M.size();
  require(q.size() == n && psi.size() == n, "obstacle LCP: dimension mismatch");
  require(tol > 0.0, "obstacle LCP: tolerance must be positive");
  require(max_iter >= 1, "obstacle LCP: max_iter must be at least 1");
  require(M.diag.minCoeff() > 0.0, "obstacle LCP: diagonal must be positive");

  LcpResult out;
  out.y = initial ? initial->cwiseMax(psi) : psi;
  require(out.y.size() == n, "obstacle LCP: initial guess has wrong dimension");
  out.residual = lcp_residual(M, q, psi, out.y);
  while (out.residual > tol) {
    if (out.iterations >= max_iter) {
      throw ConvergenceError("obstacle LCP: projected Gauss-Seidel did not converge in " + std::to_string(max_iter) +
                                 " sweeps (residual " + std::to_string(out.residual) + ")",
                             out.iterations, out.residual);
    }
    for (Index i = 0; i < n; ++i) {
      double s = -q[i];
      if (i > 0) s -= M.lower[i] * out.y[i - 1];
      if (i + 1 < n) s -= M.upper[i] * out.y[i + 1];
      out.y[i] = std::max(psi[i], s / M.diag[i]);
    }
    ++out.iterations;
    out.residual = lcp_residual(M, q, psi, out.y);
  }
  return out;
}

struct ParabolicGrid {
  Mesh1D mesh;
  double T;
  Index n_t;
  Index window_begin;  // control subdomain D = nodes [window_begin, window_end)
  Index window_end;
  Vector psi;

  ParabolicGrid(Mesh1D m, double final_time, Index steps, Index begin, Index end, Vector obstacle)
      : mesh(m), T(final_time), n_t(steps), window_begin(begin), window_end(end), psi(std::move(obstacle)) {
    require(T > 0.0 && std::isfinite(T), "parabolic grid: final time must be positive");
    require(n_t >= 1, "parabolic grid: at least one time step is required");
    require(0 <= window_begin && window_begin < window_end && window_end <= mesh.n,
            "parabolic grid: control window must be a nonempty index range inside the mesh");
    require(psi.size() == mesh.n, "parabolic grid: obstacle must have one value per interior node");
    require(psi.maxCoeff() <= 0.0, "parabolic grid: obstacle must satisfy psi <= 0");
  }

  /// Whole domain as control window.
  static ParabolicGrid full_window(Mesh1D m, double final_time, Index steps, double psi_value) {
    return ParabolicGrid(m, final_time, steps, 0, m.n, Vector::Constant(m.n, psi_value));
  }

  double tau() const { return T / static_cast<double>(n_t); }
  Index window_size() const { return window_end - window_begin; }
  Index control_dim() const { return n_t * window_size(); }

  /// Control entries for step k (0-based) extended by zero to the whole mesh.
  Vector embed(const Vector& u, Index k) const {
    Vector f = Vector::Zero(mesh.n);
    f.segment(window_begin, window_size()) = u.segment(k * window_size(), window_size());
    return f;
  }
};

struct ParabolicResult {
  Vector y_final;
  long psor_sweeps = 0;
  double max_residual = 0.0;
};

/// Implicit Euler for the parabolic obstacle problem from y(0) = 0. The control
/// is time-major: entry k * |D| + j acts on window node j during step k.
inline ParabolicResult solve_parabolic_obstacle_detailed(const Vector& u, const ParabolicGrid& grid, double psor_tol,
                                                         int psor_max_iter) {
  require(u.size() == grid.control_dim(), "parabolic obstacle: control must have n_t * |D| entries");
  require(u.allFinite(), "parabolic obstacle: control is not finite");
  const double tau = grid.tau();
  const Tridiagonal M = Tridiagonal::laplacian(grid.mesh, 1.0 / tau);

  ParabolicResult out;
  Vector y = Vector::Zero(grid.mesh.n);
  for (Index k = 0; k < grid.n_t; ++k) {
    const Vector q = -(y / tau + grid.embed(u, k));
    LcpResult step;
    try {
      step = solve_obstacle_lcp(M, q, grid.psi, psor_tol, psor_max_iter, &y);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("parabolic obstacle: time step " + std::to_string(k + 1) + ": " + e.what(),
                             e.iterations(), e.residual());
    }
    y = std::move(step.y);
    out.psor_sweeps += step.iterations;
    out.max_residual = std::max(out.max_residual, step.residual);
  }
  out.y_final = std::move(y);
  return out;
}

inline Vector solve_parabolic_obstacle(const Vector& u, const ParabolicGrid& grid, double psor_tol = 1e-9,
                                       int psor_max_iter = 200000) {
  return solve_parabolic_obstacle_detailed(u, grid, psor_tol, psor_max_iter).y_final;
}

/// Same time stepping without the obstacle (direct tridiagonal solves).
inline Vector solve_heat_implicit(const Vector& u, const ParabolicGrid& grid) {
  require(u.size() == grid.control_dim(), "heat solve: control must have n_t * |D| entries");
  const double tau = grid.tau();
  const Tridiagonal M = Tridiagonal::laplacian(grid.mesh, 1.0 / tau);
  Vector y = Vector::Zero(grid.mesh.n);
  for (Index k = 0; k < grid.n_t; ++k) y = solve_tridiagonal(M, y / tau + grid.embed(u, k));
  return y;
}

class ParabolicObstacleMap final : public ControlToStateMap {
 public:
  ParabolicObstacleMap(ParabolicGrid grid, double psor_tol = 1e-9, int psor_max_iter = 200000)
      : grid_(std::move(grid)), psor_tol_(psor_tol), psor_max_iter_(psor_max_iter) {
    require(psor_tol_ > 0.0, "parabolic obstacle: psor_tol must be positive");
    require(psor_max_iter_ >= 1, "parabolic obstacle: psor_max_iter must be at least 1");
  }
  std::string name() const override { return "parabolic-obstacle"; }
  Index input_dim() const override { return grid_.control_dim(); }
  Index output_dim() const override { return grid_.mesh.n; }
  const ParabolicGrid& grid() const { return grid_; }

 protected:
  Vector evaluate(const Vector& u) const override {
    return solve_parabolic_obstacle(u, grid_, psor_tol_, psor_max_iter_);
  }

 private:
  ParabolicGrid grid_;
  double psor_tol_;
  int psor_max_iter_;
};

}  // namespace tracklab
