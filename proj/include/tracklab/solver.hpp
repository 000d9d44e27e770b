#pragma once

// Local minimization, deterministic multistart and a brute-force grid oracle.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "tracklab/problem.hpp"

namespace tracklab {

struct LocalOptions {
  double grad_tol = 1e-8;
  double step_tol = 1e-12;
  int max_iter = 5000;
  double fd_step = 1e-6;
  double armijo_c = 1e-4;
  double initial_step = 1.0;
  double max_step = 1e6;
  bool record_history = false;
};

struct LocalSolveResult {
  Vector u_star;
  double J_star = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<double> history;  // accepted objective values, when requested
};

/// Gradient descent on the objective with finite-difference gradients and
/// Armijo backtracking (halving). Each line search starts from twice the
/// previously accepted step, which lets the step adapt to the problem scale.
inline LocalSolveResult local_minimize(const TrackingProblem& prob, const Vector& u0, const LocalOptions& opts = {}) {
  require(u0.size() == prob.control_dim(), "local_minimize: start point has wrong dimension");
  require(u0.allFinite(), "local_minimize: start point is not finite");
  require(opts.grad_tol > 0.0 && opts.step_tol > 0.0 && opts.max_iter >= 0, "local_minimize: invalid options");

  LocalSolveResult r;
  r.u_star = u0;
  r.J_star = objective(prob, u0);
  if (!std::isfinite(r.J_star)) throw Error("local_minimize: non-finite objective at the start point");
  if (opts.record_history) r.history.push_back(r.J_star);

  double alpha = opts.initial_step;
  bool first = true;
  for (r.iterations = 0; r.iterations < opts.max_iter; ++r.iterations) {
    const Vector g = gradient_fd(prob, r.u_star, opts.fd_step);
    r.grad_norm = g.norm();
    if (r.grad_norm <= opts.grad_tol) {
      r.converged = true;
      return r;
    }
    double trial = first ? alpha : std::min(2.0 * alpha, opts.max_step);
    first = false;
    const double slope = r.grad_norm * r.grad_norm;
    for (;;) {
      if (trial * r.grad_norm < opts.step_tol) {
        r.converged = true;  // step collapse
        return r;
      }
      Vector candidate = r.u_star - trial * g;
      const double J = objective(prob, candidate);
      if (!std::isfinite(J)) throw Error("local_minimize: non-finite objective during line search");
      if (J <= r.J_star - opts.armijo_c * trial * slope) {
        r.u_star = std::move(candidate);
        r.J_star = J;
        if (opts.record_history) r.history.push_back(J);
        break;
      }
      trial *= 0.5;
    }
    alpha = trial;
  }
  r.grad_norm = gradient_fd(prob, r.u_star, opts.fd_step).norm();
  r.converged = r.grad_norm <= opts.grad_tol;
  return r;
}

/// Axis-aligned sampling box.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lower, Vector upper) : lo(std::move(lower)), hi(std::move(upper)) {
    require(lo.size() == hi.size() && lo.size() > 0, "box: bounds must have equal nonzero length");
    require(lo.allFinite() && hi.allFinite(), "box: bounds must be finite");
    require((lo.array() <= hi.array()).all(), "box: lower bound exceeds upper bound");
  }

  static Box uniform(Index dim, double lower, double upper) {
    return Box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
  }

  Index dim() const { return lo.size(); }
};

/// The `index`-th start point for `seed`; independent of evaluation order.
inline Vector start_point(std::uint64_t seed, std::uint64_t index, const Box& box) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 engine(seq);
  Vector u(box.dim());
  for (Index i = 0; i < box.dim(); ++i) {
    // 53 high bits -> [0, 1); avoids implementation-defined distributions.
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * unit;
  }
  return u;
}

struct Cluster {
  Vector u;      // representative: lowest objective among members
  double J = 0.0;
  int members = 0;
  std::size_t first_index = 0;  // smallest input index that joined
};

struct ClusterSet {
  std::vector<Cluster> clusters;  // sorted by J ascending
  std::size_t n_global = 0;       // clusters[0 .. n_global) are global

  std::vector<Cluster> global() const {
    return {clusters.begin(), clusters.begin() + static_cast<std::ptrdiff_t>(n_global)};
  }
};

struct Candidate {
  Vector u;
  double J = 0.0;
};

/// Greedy clustering by control-norm distance, followed by merging of any
/// representatives that ended up within tol_u of each other.
inline ClusterSet cluster_minimizers(const std::vector<Candidate>& results, const Norm& control_norm,
                                     double tol_u = 1e-4, double tol_J = 1e-7) {
  require(!results.empty(), "cluster_minimizers: no results to cluster");
  std::vector<Cluster> clusters;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    Cluster* home = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (auto& c : clusters) {
      const double d = norm(control_norm, r.u - c.u);
      if (d <= tol_u && d < best) {
        best = d;
        home = &c;
      }
    }
    if (home == nullptr) {
      clusters.push_back({r.u, r.J, 1, k});
    } else {
      ++home->members;
      if (r.J < home->J) {
        home->u = r.u;
        home->J = r.J;
      }
    }
  }
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t a = 0; a < clusters.size() && !merged; ++a) {
      for (std::size_t b = a + 1; b < clusters.size() && !merged; ++b) {
        if (norm(control_norm, clusters[a].u - clusters[b].u) <= tol_u) {
          Cluster& keep = clusters[a];
          const Cluster& drop = clusters[b];
          keep.members += drop.members;
          keep.first_index = std::min(keep.first_index, drop.first_index);
          if (drop.J < keep.J) {
            keep.u = drop.u;
            keep.J = drop.J;
          }
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
          merged = true;
        }
      }
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
    return x.J < y.J || (x.J == y.J && x.first_index < y.first_index);
  });
  ClusterSet out;
  const double J_best = clusters.front().J;
  out.n_global = static_cast<std::size_t>(
      std::count_if(clusters.begin(), clusters.end(), [&](const Cluster& c) { return c.J <= J_best + tol_J; }));
  out.clusters = std::move(clusters);
  return out;
}

struct MultistartOptions {
  Index n_starts = 64;
  std::uint64_t seed = 0;
  Box box;
  LocalOptions local;
  double tol_u = 1e-4;
  double tol_J = 1e-7;
  std::vector<Vector> extra_starts;  // appended after the random starts
  unsigned threads = 1;               // 0 = hardware concurrency
};

struct MultistartReport {
  std::vector<Cluster> clusters;
  std::vector<Cluster> global_clusters;
  std::uint64_t seed = 0;
  Index n_starts = 0;
  Index n_converged = 0;
  Index n_failed = 0;  // starts that raised a convergence error in the state solver
  long total_iterations = 0;
};

/// Runs local_minimize from every start and clusters the converged results.
/// Results are assembled in start-index order, so the report does not depend
/// on the number of threads.
inline MultistartReport multistart(const TrackingProblem& prob, const MultistartOptions& opts) {
  require(opts.n_starts >= 1 || !opts.extra_starts.empty(), "multistart: n_starts must be at least 1");
  require(opts.box.dim() == prob.control_dim(), "multistart: box dimension does not match the control dimension");

  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(opts.n_starts) + opts.extra_starts.size());
  for (Index k = 0; k < opts.n_starts; ++k) starts.push_back(start_point(opts.seed, static_cast<std::uint64_t>(k), opts.box));
  for (const auto& s : opts.extra_starts) starts.push_back(s);

  std::vector<std::optional<LocalSolveResult>> results(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < starts.size(); k += stride) {
      try {
        results[k] = local_minimize(prob, starts[k], opts.local);
      } catch (const ConvergenceError&) {
        results[k].reset();
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, starts.size()));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MultistartReport report;
  report.seed = opts.seed;
  report.n_starts = static_cast<Index>(starts.size());
  std::vector<Candidate> converged;
  for (const auto& r : results) {
    if (!r) {
      ++report.n_failed;
      continue;
    }
    report.total_iterations += r->iterations;
    if (r->converged) converged.push_back({r->u_star, r->J_star});
  }
  report.n_converged = static_cast<Index>(converged.size());
  if (converged.empty()) {
    throw ConvergenceError("multistart: none of the " + std::to_string(starts.size()) + " local solves converged", 0,
                           std::numeric_limits<double>::quiet_NaN());
  }
  ClusterSet cs = cluster_minimizers(converged, prob.control_norm(), opts.tol_u, opts.tol_J);
  report.global_clusters = cs.global();
  report.clusters = std::move(cs.clusters);
  return report;
}

// ---------------------------------------------------------------------------
// Grid oracle

struct GridOracleResult {
  Vector u_best;
  double J_best = 0.0;
  std::vector<Candidate> near_optimal;  // all grid points with J <= J_best + tol
  Vector spacing;
};

/// i-th of `count` equispaced points on [lo, hi]; exactly mirror-symmetric
/// when lo == -hi.
inline double grid_coordinate(double lo, double hi, Index i, Index count) {
  if (count == 1) return 0.5 * (lo + hi);
  const double m = static_cast<double>(count - 1);
  return (lo * static_cast<double>(count - 1 - i) + hi * static_cast<double>(i)) / m;
}

inline GridOracleResult grid_oracle(const TrackingProblem& prob, const Box& box, Index points_per_dim,
                                    double tol = 1e-6) {
  const Index dim = prob.control_dim();
  require(dim <= 3, "grid_oracle: control dimension " + std::to_string(dim) + " exceeds the brute-force limit of 3");
  require(box.dim() == dim, "grid_oracle: box dimension does not match the control dimension");
  require(points_per_dim >= 2, "grid_oracle: need at least two points per dimension");
  require(tol >= 0.0, "grid_oracle: tolerance must be nonnegative");

  Index total = 1;
  for (Index d = 0; d < dim; ++d) total *= points_per_dim;

  std::vector<double> values(static_cast<std::size_t>(total));
  auto point_at = [&](Index flat) {
    Vector u(dim);
    for (Index d = 0; d < dim; ++d) {
      const Index i = flat % points_per_dim;
      flat /= points_per_dim;
      u[d] = grid_coordinate(box.lo[d], box.hi[d], i, points_per_dim);
    }
    return u;
  };

  GridOracleResult out;
  out.J_best = std::numeric_limits<double>::infinity();
  for (Index flat = 0; flat < total; ++flat) {
    const Vector u = point_at(flat);
    const double J = objective(prob, u);
    values[static_cast<std::size_t>(flat)] = J;
    if (J < out.J_best) {
      out.J_best = J;
      out.u_best = u;
    }
  }
  for (Index flat = 0; flat < total; ++flat) {
    if (values[static_cast<std::size_t>(flat)] <= out.J_best + tol) {
      out.near_optimal.push_back({point_at(flat), values[static_cast<std::size_t>(flat)]});
    }
  }
  out.spacing = (box.hi - box.lo) / static_cast<double>(points_per_dim - 1);
  return out;
}

/// Single-linkage clusters of the oracle's near-optimal points: two points are
/// linked when they are grid neighbours (including diagonals).
inline std::vector<Cluster> oracle_clusters(const GridOracleResult& oracle) {
  const std::size_t m = oracle.near_optimal.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      const Vector diff = (oracle.near_optimal[a].u - oracle.near_optimal[b].u).cwiseAbs();
      bool adjacent = true;
      for (Index d = 0; d < diff.size() && adjacent; ++d) {
        adjacent = diff[d] <= 1.5 * oracle.spacing[d];
      }
      if (adjacent) parent[find(a)] = find(b);
    }
  }
  std::vector<Cluster> clusters;
  std::vector<std::ptrdiff_t> slot(m, -1);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t root = find(a);
    const auto& pt = oracle.near_optimal[a];
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(clusters.size());
      clusters.push_back({pt.u, pt.J, 1, a});
    } else {
      Cluster& c = clusters[static_cast<std::size_t>(slot[root])];
      ++c.members;
      if (pt.J < c.J) {
        c.u = pt.u;
        c.J = pt.J;
      }
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) { return x.J < y.J; });
  return clusters;
}

}  // namespace tracklab
