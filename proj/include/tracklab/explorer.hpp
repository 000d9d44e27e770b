#pragma once

// Experiments on the solution set of tracking problems: affinity defects of
// the control-to-state map, constructive search for targets with two global
// minimizers, uniqueness along the segments joining such a target to each of
// its minimizers, the resulting discontinuity of any minimizer selection,
// Tikhonov sweeps, multiplicity scans over target grids and the infinity-norm
// example with a continuum of minimizers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tracklab/solver.hpp"

namespace tracklab {

/// max over lambda of || S(l u1 + (1-l) u2) - l S(u1) - (1-l) S(u2) ||.
inline double affinity_defect(const ControlToStateMap& map, const Norm& state_norm, const Vector& u1, const Vector& u2,
                              const std::vector<double>& lambdas) {
  require(!lambdas.empty(), "affinity_defect: empty lambda list");
  const Vector s1 = map(u1);
  const Vector s2 = map(u2);
  double worst = 0.0;
  for (double l : lambdas) {
    require(l >= 0.0 && l <= 1.0, "affinity_defect: lambda must lie in [0, 1]");
    const Vector mid = map(l * u1 + (1.0 - l) * u2);
    worst = std::max(worst, norm(state_norm, mid - l * s1 - (1.0 - l) * s2));
  }
  return worst;
}

/// max over alpha of || L(alpha u) - alpha L(u) || with L = S - S(0).
inline double linearity_defect(const ControlToStateMap& map, const Norm& state_norm, const Vector& u,
                               const std::vector<double>& alphas) {
  require(!alphas.empty(), "linearity_defect: empty alpha list");
  const Vector s0 = map(Vector::Zero(u.size()));
  const Vector Lu = map(u) - s0;
  double worst = 0.0;
  for (double a : alphas) {
    const Vector L_au = map(a * u) - s0;
    worst = std::max(worst, norm(state_norm, L_au - a * Lu));
  }
  return worst;
}

/// Two distinct global solutions (y, u), (y', u') of the same problem.
struct SolutionPair {
  Vector y_first, u_first;
  Vector y_second, u_second;
  double J_first = 0.0, J_second = 0.0;

  TargetTuple first() const { return {y_first, u_first}; }
  TargetTuple second() const { return {y_second, u_second}; }
};

inline double pair_separation(const TrackingProblem& prob, const SolutionPair& pair) {
  return prob.product_distance(pair.first(), pair.second());
}

/// Throws ExperimentError unless the pair consists of two points of the graph
/// at product distance > tol_u with objective values equal within tol_J.
inline void certify_pair(const TrackingProblem& prob, const SolutionPair& pair, double tol_u, double tol_J) {
  const double J1 = objective(prob, pair.u_first);
  const double J2 = objective(prob, pair.u_second);
  if (std::abs(J1 - J2) > tol_J) {
    throw ExperimentError("solution pair is not certified: objective values differ by " + std::to_string(J1 - J2));
  }
  if (pair_separation(prob, pair) <= tol_u) {
    throw ExperimentError("solution pair is not certified: the two solutions coincide");
  }
}

using TargetPath = std::function<TargetTuple(double)>;

/// Straight path s -> (1 - s) from + s to, s in [0, 1].
inline TargetPath line_path(TargetTuple from, TargetTuple to) {
  require(from.y_d.size() == to.y_d.size() && from.u_d.size() == to.u_d.size(), "line_path: endpoint dimensions differ");
  return [from = std::move(from), to = std::move(to)](double s) {
    return TargetTuple{(1.0 - s) * from.y_d + s * to.y_d, (1.0 - s) * from.u_d + s * to.u_d};
  };
}

struct NonuniqueResult {
  double s = 0.0;  // path parameter of the certified target
  TargetTuple target;
  SolutionPair pair;
  int bisection_steps = 0;
  double separation = 0.0;
  MultistartReport ridge_report;  // verification run at the certified target
};

/// Locates a target with two global minimizers by bisection along `path`.
/// The endpoints are solved globally by multistart; each bisection step
/// follows the two flanking minimizers with warm-started local solves and
/// keeps the half in which the two branches swap global optimality. The final
/// target is re-checked by a multistart that also seeds both branch minimizers.
inline NonuniqueResult find_nonunique_target(const TrackingProblem& base, const TargetPath& path,
                                             const MultistartOptions& ms, double bisect_tol = 1e-10) {
  require(bisect_tol > 0.0, "find_nonunique_target: bisect_tol must be positive");
  const std::string no_jump = "path does not cross the exceptional set";

  const MultistartReport at_lo = multistart(base.with_target(path(0.0)), ms);
  const MultistartReport at_hi = multistart(base.with_target(path(1.0)), ms);
  Vector u_lo = at_lo.global_clusters.front().u;
  Vector u_hi = at_hi.global_clusters.front().u;
  if (base.control_distance(u_lo, u_hi) <= ms.tol_u) throw ExperimentError(no_jump + " (endpoint minimizers agree)");

  double lo = 0.0, hi = 1.0;
  NonuniqueResult out;
  while (hi - lo > bisect_tol && out.bisection_steps < 200) {
    const double m = 0.5 * (lo + hi);
    const TrackingProblem pm = base.with_target(path(m));
    const LocalSolveResult a = local_minimize(pm, u_lo, ms.local);
    const LocalSolveResult b = local_minimize(pm, u_hi, ms.local);
    if (pm.control_distance(a.u_star, b.u_star) <= ms.tol_u) {
      // Both branches collapsed into one basin; attribute it to the closer flank.
      if (pm.control_distance(a.u_star, u_lo) <= pm.control_distance(a.u_star, u_hi)) {
        lo = m;
        u_lo = a.u_star;
      } else {
        hi = m;
        u_hi = b.u_star;
      }
    } else if (a.J_star <= b.J_star) {
      lo = m;
      u_lo = a.u_star;
    } else {
      hi = m;
      u_hi = b.u_star;
    }
    ++out.bisection_steps;
  }

  out.s = 0.5 * (lo + hi);
  out.target = path(out.s);
  const TrackingProblem ridge = base.with_target(out.target);
  const LocalSolveResult a = local_minimize(ridge, u_lo, ms.local);
  const LocalSolveResult b = local_minimize(ridge, u_hi, ms.local);
  out.pair = {ridge.map()(a.u_star), a.u_star, ridge.map()(b.u_star), b.u_star, a.J_star, b.J_star};
  out.separation = pair_separation(ridge, out.pair);
  if (ridge.control_distance(a.u_star, b.u_star) <= ms.tol_u) {
    throw ExperimentError(no_jump + " (no basin jump: both branches reach the same minimizer)");
  }
  if (std::abs(a.J_star - b.J_star) > ms.tol_J) {
    throw ExperimentError(no_jump + " (branch objective values differ by " + std::to_string(a.J_star - b.J_star) +
                          " at the bisection limit)");
  }

  MultistartOptions verify = ms;
  verify.extra_starts.push_back(a.u_star);
  verify.extra_starts.push_back(b.u_star);
  out.ridge_report = multistart(ridge, verify);
  const double J_pair = std::min(a.J_star, b.J_star);
  if (out.ridge_report.global_clusters.front().J < J_pair - ms.tol_J) {
    throw ExperimentError("ridge candidate is not global: multistart found objective " +
                          std::to_string(out.ridge_report.global_clusters.front().J) + " below " +
                          std::to_string(J_pair));
  }
  return out;
}

/// t (y, u) + (1 - t) (y_d, u_d).
inline TargetTuple segment_target(double t, const TargetTuple& solution, const TargetTuple& target) {
  require(t >= 0.0 && t <= 1.0, "segment_target: t must lie in [0, 1], got " + std::to_string(t));
  require(solution.y_d.size() == target.y_d.size() && solution.u_d.size() == target.u_d.size(),
          "segment_target: dimension mismatch");
  return {t * solution.y_d + (1.0 - t) * target.y_d, t * solution.u_d + (1.0 - t) * target.u_d};
}

struct OracleCheck {
  bool enabled = true;
  Index points_per_dim = 4001;
  double tol = 1e-6;
};

struct SegmentEntry {
  double t = 0.0;
  Index global_count = 0;
  Vector u_rep;
  double J = 0.0;
  double distance = 0.0;     // control distance of the representative to the expected solution
  Index oracle_count = -1;   // -1 when the oracle was not run
  bool oracle_agrees = true;
  bool pass = false;
};

struct SegmentReport {
  std::vector<double> t_values;
  std::vector<SegmentEntry> entries;
  bool verdict = false;
};

namespace detail {

inline SegmentReport verify_one_segment(const TrackingProblem& prob, const TargetTuple& solution,
                                        const std::vector<double>& t_list, const MultistartOptions& ms,
                                        const OracleCheck& oracle, double match_tol) {
  SegmentReport report;
  report.t_values = t_list;
  report.verdict = true;
  for (double t : t_list) {
    const TrackingProblem pt = prob.with_target(segment_target(t, solution, prob.target()));
    MultistartReport r;
    try {
      r = multistart(pt, ms);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("segment t=" + std::to_string(t) + ": " + e.what(), e.iterations(), e.residual());
    }
    SegmentEntry entry;
    entry.t = t;
    entry.global_count = static_cast<Index>(r.global_clusters.size());
    entry.u_rep = r.global_clusters.front().u;
    entry.J = r.global_clusters.front().J;
    entry.distance = pt.control_distance(entry.u_rep, solution.u_d);
    entry.pass = entry.global_count == 1 && entry.distance <= match_tol;
    if (oracle.enabled && pt.control_dim() <= 2) {
      const GridOracleResult g = grid_oracle(pt, ms.box, oracle.points_per_dim, oracle.tol);
      const std::vector<Cluster> oc = oracle_clusters(g);
      entry.oracle_count = static_cast<Index>(oc.size());
      const Vector off = (oc.front().u - solution.u_d).cwiseAbs();
      entry.oracle_agrees = oc.size() == 1 && (off.array() <= g.spacing.array() * (1.0 + 1e-9)).all();
      entry.pass = entry.pass && entry.oracle_agrees;
    }
    report.verdict = report.verdict && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace detail

/// For each t and each solution of the certified pair, the segment target must
/// have exactly one global minimizer, equal to that solution.
inline std::pair<SegmentReport, SegmentReport> verify_segment_uniqueness(const TrackingProblem& prob,
                                                                         const SolutionPair& pair,
                                                                         const std::vector<double>& t_list,
                                                                         const MultistartOptions& ms,
                                                                         const OracleCheck& oracle = {},
                                                                         double match_tol = 1e-4) {
  require(!t_list.empty(), "verify_segment_uniqueness: empty t list");
  certify_pair(prob, pair, ms.tol_u, ms.tol_J);
  return {detail::verify_one_segment(prob, pair.first(), t_list, ms, oracle, match_tol),
          detail::verify_one_segment(prob, pair.second(), t_list, ms, oracle, match_tol)};
}

struct WitnessEntry {
  double t = 0.0;
  double distance_first = 0.0;   // product distance of the first target sequence to the ridge target
  double distance_second = 0.0;
  Vector u_first, u_second;      // computed global minimizers along each sequence
  Index count_first = 0, count_second = 0;
  double gap = 0.0;              // product distance between the two branch solutions
};

struct WitnessReport {
  std::vector<WitnessEntry> entries;
  double separation = 0.0;
  bool certified = false;
};

/// Two target sequences converging to the ridge target whose unique minimizers
/// stay pinned to the two different solutions of the pair.
inline WitnessReport discontinuity_witness(const TrackingProblem& prob, const SolutionPair& pair,
                                           const std::vector<double>& t_sequence, const MultistartOptions& ms) {
  require(!t_sequence.empty(), "discontinuity_witness: empty t sequence");
  for (std::size_t k = 0; k < t_sequence.size(); ++k) {
    require(t_sequence[k] > 0.0 && t_sequence[k] <= 1.0, "discontinuity_witness: t values must lie in (0, 1]");
    require(k == 0 || t_sequence[k] <= t_sequence[k - 1], "discontinuity_witness: t sequence must be nonincreasing");
  }
  certify_pair(prob, pair, ms.tol_u, ms.tol_J);

  WitnessReport report;
  report.separation = pair_separation(prob, pair);
  report.certified = true;
  const TargetTuple ridge = prob.target();
  for (std::size_t k = 0; k < t_sequence.size(); ++k) {
    const double t = t_sequence[k];
    WitnessEntry e;
    e.t = t;
    const TargetTuple first = segment_target(t, pair.first(), ridge);
    const TargetTuple second = segment_target(t, pair.second(), ridge);
    e.distance_first = prob.product_distance(first, ridge);
    e.distance_second = prob.product_distance(second, ridge);
    const MultistartReport r1 = multistart(prob.with_target(first), ms);
    const MultistartReport r2 = multistart(prob.with_target(second), ms);
    e.u_first = r1.global_clusters.front().u;
    e.u_second = r2.global_clusters.front().u;
    e.count_first = static_cast<Index>(r1.global_clusters.size());
    e.count_second = static_cast<Index>(r2.global_clusters.size());
    e.gap = prob.product_distance({prob.map()(e.u_first), e.u_first}, {prob.map()(e.u_second), e.u_second});

    bool ok = e.count_first == 1 && e.count_second == 1 &&
              prob.control_distance(e.u_first, pair.u_first) <= ms.tol_u &&
              prob.control_distance(e.u_second, pair.u_second) <= ms.tol_u &&
              e.gap >= report.separation - 2.0 * ms.tol_u;
    if (k > 0 && t_sequence[k] < t_sequence[k - 1]) {
      const WitnessEntry& prev = report.entries.back();
      ok = ok && e.distance_first < prev.distance_first && e.distance_second < prev.distance_second;
    }
    report.certified = report.certified && ok;
    report.entries.push_back(std::move(e));
  }
  return report;
}

struct SweepRow {
  double nu = 0.0;
  Index global_count = 0;
  std::vector<Vector> representatives;
  double J = 0.0;
};

inline std::vector<SweepRow> tikhonov_sweep(const TrackingProblem& base, const std::vector<double>& nus,
                                            const MultistartOptions& ms) {
  std::vector<SweepRow> rows;
  for (double nu : nus) {
    require(nu > 0.0, "tikhonov_sweep: nu values must be positive");
    const MultistartReport r = multistart(rescale_nu(base, nu), ms);
    SweepRow row;
    row.nu = nu;
    row.global_count = static_cast<Index>(r.global_clusters.size());
    for (const auto& c : r.global_clusters) row.representatives.push_back(c.u);
    row.J = r.global_clusters.front().J;
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ScanAxis {
  double lo = 0.0, hi = 0.0;
  Index count = 1;

  double value(Index i) const { return grid_coordinate(lo, hi, i, count); }
};

struct ScanCell {
  double a = 0.0, b = 0.0;
  Index multiplicity = 0;
  double J = 0.0;
};

struct ScanReport {
  ScanAxis a_axis, b_axis;
  std::vector<ScanCell> cells;  // a-major order
  std::vector<ScanCell> exceptional;
};

using TargetFamily = std::function<TargetTuple(double, double)>;

/// Multiplicity of the global solution set on a 2D grid of targets.
inline ScanReport chebyshev_scan(const TrackingProblem& base, const TargetFamily& family, ScanAxis a_axis,
                                 ScanAxis b_axis, const MultistartOptions& ms) {
  require(a_axis.count >= 1 && b_axis.count >= 1, "chebyshev_scan: axis counts must be positive");
  ScanReport report{a_axis, b_axis, {}, {}};
  for (Index i = 0; i < a_axis.count; ++i) {
    for (Index j = 0; j < b_axis.count; ++j) {
      ScanCell cell{a_axis.value(i), b_axis.value(j), 0, 0.0};
      const MultistartReport r = multistart(base.with_target(family(cell.a, cell.b)), ms);
      cell.multiplicity = static_cast<Index>(r.global_clusters.size());
      cell.J = r.global_clusters.front().J;
      if (cell.multiplicity >= 2) report.exceptional.push_back(cell);
      report.cells.push_back(cell);
    }
  }
  return report;
}

/// Scalar targets (y_d, u_d) = (a * y_shape, b * u_shape).
inline TargetFamily scaled_target_family(Vector y_shape, Vector u_shape) {
  return [y = std::move(y_shape), u = std::move(u_shape)](double a, double b) { return TargetTuple{a * y, b * u}; };
}

struct LinfDemoResult {
  double J_best = 0.0;
  Vector u_best;
  std::vector<Vector> near_optimal;
  Index resolution = 0;
};

/// min ||(1,0) - y||_inf^2 + ||u||_inf^2 s.t. y = u, by brute force on
/// [-1.5, 1.5]^2. Every (1/2, s) with |s| <= 1/2 is optimal.
inline LinfDemoResult linf_demo(Index resolution, double tol = 1e-6) {
  require(resolution >= 100, "linf_demo: grid_resolution must be at least 100");
  auto J = [](double u1, double u2) {
    const double a = std::max(std::abs(1.0 - u1), std::abs(u2));
    const double b = std::max(std::abs(u1), std::abs(u2));
    return a * a + b * b;
  };
  LinfDemoResult out;
  out.resolution = resolution;
  out.J_best = std::numeric_limits<double>::infinity();
  std::vector<double> values(static_cast<std::size_t>(resolution * resolution));
  for (Index i = 0; i < resolution; ++i) {
    for (Index j = 0; j < resolution; ++j) {
      const double u1 = grid_coordinate(-1.5, 1.5, i, resolution);
      const double u2 = grid_coordinate(-1.5, 1.5, j, resolution);
      const double v = J(u1, u2);
      values[static_cast<std::size_t>(i * resolution + j)] = v;
      if (v < out.J_best) {
        out.J_best = v;
        out.u_best = Vector{{u1, u2}};
      }
    }
  }
  for (Index i = 0; i < resolution; ++i) {
    for (Index j = 0; j < resolution; ++j) {
      if (values[static_cast<std::size_t>(i * resolution + j)] <= out.J_best + tol) {
        out.near_optimal.push_back(Vector{{grid_coordinate(-1.5, 1.5, i, resolution),
                                           grid_coordinate(-1.5, 1.5, j, resolution)}});
      }
    }
  }
  return out;
}

}  // namespace tracklab
