// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "tracklab/scenario.hpp"

using namespace tracklab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

TrackingProblem scalar_problem(MapPtr map, double y_d, double u_d) {
  return TrackingProblem::euclidean(std::move(map), Vector::Constant(1, y_d), Vector::Constant(1, u_d));
}

MultistartOptions scalar_options(std::uint64_t seed = 42) {
  MultistartOptions o;
  o.seed = seed;
  o.box = Box::uniform(1, -2.0, 2.0);
  return o;
}

TargetPath scalar_path(double y_d, double lo, double hi) {
  return line_path({Vector::Constant(1, y_d), Vector::Constant(1, lo)}, {Vector::Constant(1, y_d), Vector::Constant(1, hi)});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1. Tikhonov family for the absolute value map -------------------------
Outcome tikhonov_family() {
  Outcome o;
  for (double nu : {0.5, 1.0, 2.0, 10.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = multistart(rescale_nu(scalar_problem(std::make_shared<AbsMap>(1), 1.0, 0.0), nu), scalar_options());
    const double dt = seconds_since(t0);
    const double expected = 1.0 / (1.0 + nu);
    o.check(r.global_clusters.size() == 2, "nu=" + num(nu) + ": " + std::to_string(r.global_clusters.size()) + " global");
    if (r.global_clusters.size() != 2) continue;
    const double a = r.global_clusters[0].u[0], b = r.global_clusters[1].u[0];
    const double err = std::max(std::abs(std::min(a, b) + expected), std::abs(std::max(a, b) - expected));
    o.check(err <= 1e-6, "nu=" + num(nu) + ": minimizer error " + num(err));
    o.check(std::abs(r.global_clusters[0].J - r.global_clusters[1].J) <= 1e-9, "nu=" + num(nu) + ": J mismatch");
    o.check(dt < 1.0, "nu=" + num(nu) + ": " + num(dt) + " s");
  }
  return o;
}

// Ridge of the semilinear instance restricted to span(sin): S is linear on
// each half line with slopes 1/(lambda_h + 1) and 1/lambda_h.
double semilinear_ridge_coefficient(const Mesh1D& mesh, double y_coef) {
  const double s = std::sin(kPi * mesh.h / 2.0);
  const double lam = 4.0 / (mesh.h * mesh.h) * s * s;
  auto branch = [&](double slope, double ud, double sign) {
    double c = (ud + slope * y_coef) / (1.0 + slope * slope);
    c = sign > 0 ? std::max(c, 0.0) : std::min(c, 0.0);
    return std::pow(slope * c - y_coef, 2) + std::pow(c - ud, 2);
  };
  auto gap = [&](double ud) { return branch(1.0 / (lam + 1.0), ud, 1.0) - branch(1.0 / lam, ud, -1.0); };
  double lo = 0.0, hi = 10.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --- 2. Ridge search on three non-affine maps ------------------------------
Outcome ridge_search() {
  Outcome o;
  auto certify = [&](const std::string& tag, const NonuniqueResult& r) {
    const double dJ = std::abs(r.pair.J_first - r.pair.J_second);
    o.check(r.separation >= 0.1, tag + ": separation " + num(r.separation));
    o.check(dJ <= 1e-7, tag + ": |dJ| " + num(dJ));
  };
  const auto abs = find_nonunique_target(scalar_problem(std::make_shared<AbsMap>(1), 1.0, 0.0),
                                         scalar_path(1.0, -0.5, 0.5), scalar_options());
  certify("abs", abs);
  const auto sq = find_nonunique_target(scalar_problem(std::make_shared<SquareMap>(1), 1.0, 0.0),
                                        scalar_path(1.0, -0.3, 0.4), scalar_options());
  certify("square", sq);

  const Mesh1D mesh(99);
  const Vector z = sine_profile(mesh);
  auto map = std::make_shared<CachedMap>(std::make_shared<SemilinearMap>(SemilinearConfig(mesh)));
  const TrackingProblem base(map, -25.0 * z, 2.4 * z, 2.0, GridNorm(mesh.h), GridNorm(mesh.h));
  MultistartOptions ms;
  ms.seed = 1;
  ms.n_starts = 16;
  ms.box = Box::uniform(mesh.n, -5.0, 5.0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto pde = find_nonunique_target(base, line_path({-25.0 * z, 2.0 * z}, {-25.0 * z, 2.8 * z}), ms);
  const double dt = seconds_since(t0);
  certify("semilinear", pde);
  const double found = pde.target.u_d.dot(z) / z.dot(z);
  const double exact = semilinear_ridge_coefficient(mesh, -25.0);
  o.check(std::abs(found - exact) <= 1e-6, "semilinear ridge at " + num(found) + " vs " + num(exact));
  o.check(dt < 60.0, "semilinear: " + num(dt) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("semilinear ridge ") + num(found) + ", " + num(dt) + " s";
  return o;
}

SolutionPair pair_from(const TrackingProblem& prob, double u) {
  SolutionPair p;
  p.u_first = Vector::Constant(1, -u);
  p.u_second = Vector::Constant(1, u);
  p.y_first = prob.map()(p.u_first);
  p.y_second = prob.map()(p.u_second);
  p.J_first = objective(prob, p.u_first);
  p.J_second = objective(prob, p.u_second);
  return p;
}

// --- 3. Uniqueness on the segments towards each solution -------------------
Outcome segment_uniqueness() {
  Outcome o;
  const std::vector<double> ts = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [tag, map] : {std::pair<std::string, MapPtr>{"abs", std::make_shared<AbsMap>(1)},
                                 {"square", std::make_shared<SquareMap>(1)}}) {
    const auto base = scalar_problem(map, 1.0, 0.0);
    const auto ridge = find_nonunique_target(base, scalar_path(1.0, -0.3, 0.4), scalar_options());
    const auto [first, second] = verify_segment_uniqueness(base.with_target(ridge.target), ridge.pair, ts,
                                                           scalar_options(), OracleCheck{true, 4001, 1e-6});
    o.check(first.verdict && second.verdict, tag + ": segment verdict failed");
  }
  const double dt = seconds_since(t0);
  o.check(dt < 10.0, num(dt) + " s");
  return o;
}

// --- 4. Discontinuity of the solution map at the ridge ---------------------
Outcome discontinuity() {
  Outcome o;
  const auto prob = scalar_problem(std::make_shared<AbsMap>(1), 1.0, 0.0);
  std::vector<double> ts;
  for (int k = 1; k <= 8; ++k) ts.push_back(std::ldexp(1.0, -k));
  const auto w = discontinuity_witness(prob, pair_from(prob, 0.5), ts, scalar_options());
  o.check(w.certified, "witness not certified");
  for (std::size_t k = 0; k < w.entries.size(); ++k) {
    const auto& e = w.entries[k];
    o.check(e.gap >= 0.99, "gap " + num(e.gap) + " at t=" + num(e.t));
    o.check(std::abs(e.gap - w.entries.front().gap) <= 1e-6, "gap not constant at t=" + num(e.t));
    if (k > 0) {
      const double ratio = e.distance_first / w.entries[k - 1].distance_first;
      o.check(std::abs(ratio - 0.5) <= 1e-9, "distance ratio " + num(ratio));
    }
  }
  return o;
}

// --- 5. Semilinear solver accuracy and non-affinity ------------------------
Outcome semilinear_solver() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto error = [](Index n, double sign) {
    const Mesh1D mesh(n);
    const Vector y = sine_profile(mesh, sign);
    return (solve_semilinear(kPi * kPi * y + y.cwiseMax(0.0), SemilinearConfig(mesh)) - y).lpNorm<Eigen::Infinity>();
  };
  for (double sign : {1.0, -1.0}) {
    const double fine = error(999, sign);
    o.check(fine <= 1e-4, "manufactured error " + num(fine));
    const double ratio = error(49, sign) / error(99, sign);
    o.check(ratio >= 3.0 && ratio <= 5.0, "refinement ratio " + num(ratio));
  }
  const Mesh1D mesh(199);
  const Vector z = sine_profile(mesh);
  const auto [u1, u2] = counterexample_controls(z, mesh);
  const SemilinearConfig cfg(mesh);
  const double e1 = (solve_semilinear(u1, cfg) - 2.0 * z).lpNorm<Eigen::Infinity>();
  const double e2 = (solve_semilinear(u2, cfg) + 2.0 * z).lpNorm<Eigen::Infinity>();
  o.check(e1 <= 1e-8 && e2 <= 1e-8, "counterexample errors " + num(e1) + ", " + num(e2));
  const double defect = affinity_defect(SemilinearMap(cfg), GridNorm(mesh.h), u1, u2, {0.25, 0.5, 0.75});
  o.check(defect > 0.05, "affinity defect " + num(defect));
  const double dt = seconds_since(t0);
  o.check(dt < 5.0, num(dt) + " s");
  if (o.pass) o.detail = "defect " + num(defect) + ", " + num(dt) + " s";
  return o;
}

// --- 6. Parabolic obstacle solver -------------------------------------------
Outcome parabolic_solver() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-30.0, 10.0);
  const double psor_tol = 1e-9;
  {
    const Mesh1D mesh(49);
    const ParabolicGrid g(mesh, 0.5, 50, 10, 40, Vector::Constant(mesh.n, -0.05));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Vector u = Vector::NullaryExpr(g.control_dim(), [&] { return d(rng); });
      worst = std::min(worst, (solve_parabolic_obstacle(u, g, psor_tol) - g.psi).minCoeff());
    }
    o.check(worst >= -1e-9, "obstacle violated by " + num(-worst));
  }
  {
    const ParabolicGrid g = ParabolicGrid::full_window(Mesh1D(49), 0.5, 50, -1e6);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Vector u = Vector::NullaryExpr(g.control_dim(), [&] { return d(rng); });
      worst = std::max(worst, (solve_parabolic_obstacle(u, g, psor_tol) - solve_heat_implicit(u, g)).lpNorm<Eigen::Infinity>());
    }
    o.check(worst <= psor_tol * 50, "inactive obstacle mismatch " + num(worst));
  }
  {
    const Mesh1D mesh(99);
    const ParabolicGrid g = ParabolicGrid::full_window(mesh, 1.0, 100, -1.0);
    Vector u(g.control_dim());
    for (Index k = 0; k < g.n_t; ++k) u.segment(k * mesh.n, mesh.n) = sine_profile(mesh, kPi * kPi);
    const double err =
        (solve_parabolic_obstacle(u, g, psor_tol) - sine_profile(mesh)).lpNorm<Eigen::Infinity>();
    o.check(err <= 2e-2, "steady-state error " + num(err));
  }
  const double dt = seconds_since(t0);
  o.check(dt < 10.0, num(dt) + " s");
  return o;
}

// --- 7. Infinity-norm example ----------------------------------------------
Outcome linf() {
  Outcome o;
  const auto r = linf_demo(301);
  o.check(std::abs(r.J_best - 0.5) <= 1e-6, "J_best " + num(r.J_best));
  std::size_t on_segment = 0;
  for (const auto& u : r.near_optimal)
    if (std::abs(u[0] - 0.5) <= 1e-9 && std::abs(u[1]) <= 0.5 + 1e-9) ++on_segment;
  o.check(on_segment >= 50, std::to_string(on_segment) + " points on the segment");
  if (o.pass) o.detail = std::to_string(on_segment) + " minimizers on the segment";
  return o;
}

// --- 8. Multistart against brute force on analytic instances ---------------
Outcome oracle_equivalence() {
  Outcome o;
  struct Case {
    std::string tag;
    TrackingProblem prob;
    Index points;
  };
  const Matrix A{{2.0, 0.5}, {0.5, 1.0}};
  const Matrix B{{1.0, 0.0}, {0.0, 2.0}};
  std::vector<Case> cases = {
      {"abs 1d", scalar_problem(std::make_shared<AbsMap>(1), 1.0, 0.0), 4001},
      {"abs 1d shifted", scalar_problem(std::make_shared<AbsMap>(1), 1.0, 0.3), 4001},
      {"square 1d", scalar_problem(std::make_shared<SquareMap>(1), 1.0, 0.0), 4001},
      {"square 1d nu=10", rescale_nu(scalar_problem(std::make_shared<SquareMap>(1), 1.0, 0.0), 10.0), 4001},
      {"affine 1d", scalar_problem(std::make_shared<AffineMap>(AffineMap::identity(1)), 2.0, 0.0), 4001},
      {"affine 2d", TrackingProblem::euclidean(std::make_shared<AffineMap>(Matrix{{1.0, 2.0}, {0.0, 1.0}}, Vector{{0.1, 0.0}}),
                                               Vector{{1.0, -1.0}}, Vector{{0.0, 0.5}}),
       401},
      {"abs 2d", TrackingProblem::euclidean(std::make_shared<AbsMap>(2), Vector{{1.0, 0.5}}, Vector{{0.0, 0.2}}), 401},
      {"square 2d weighted", TrackingProblem(std::make_shared<SquareMap>(2), Vector{{1.0, 1.2}}, Vector::Zero(2), 2.0,
                                             WeightedNorm(A, 0.5), WeightedNorm(B, 0.5)),
       401},
  };
  for (const auto& c : cases) {
    MultistartOptions ms;
    ms.seed = 7;
    ms.box = Box::uniform(c.prob.control_dim(), -2.0, 2.0);
    const auto r = multistart(c.prob, ms);
    const auto g = grid_oracle(c.prob, ms.box, c.points, 1e-6);
    const auto oc = oracle_clusters(g);
    o.check(r.global_clusters.size() == oc.size(),
            c.tag + ": " + std::to_string(r.global_clusters.size()) + " vs oracle " + std::to_string(oc.size()));
    o.check(r.global_clusters.front().J <= g.J_best + 1e-12, c.tag + ": multistart worse than the grid");
    for (const auto& oc_cluster : oc) {
      bool matched = false;
      for (const auto& mc : r.global_clusters)
        matched = matched || ((mc.u - oc_cluster.u).cwiseAbs().array() <= g.spacing.array() * (1.0 + 1e-9)).all();
      o.check(matched, c.tag + ": oracle cluster without a multistart match");
    }
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// --- 9. Reproducibility of every bundled scenario --------------------------
Outcome determinism() {
  Outcome o;
  int count = 0;
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(TRACKLAB_SCENARIO_DIR))
    if (e.path().extension() == ".json") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  const fs::path root = fs::temp_directory_path() / "tracklab-acceptance";
  for (const auto& cfg : configs) {
    std::string outputs[2][2];
    for (int run = 0; run < 2; ++run) {
      const fs::path dir = root / (cfg.stem().string() + (run ? "-b" : "-a"));
      fs::remove_all(dir);
      std::ostringstream log, err;
      const int code = run_scenario(cfg, {std::nullopt, dir}, log, err);
      o.check(code == 0, cfg.filename().string() + " exited " + std::to_string(code));
      outputs[run][0] = slurp(dir / "result.json");
      outputs[run][1] = slurp(dir / "result.csv");
    }
    o.check(outputs[0][0] == outputs[1][0] && outputs[0][1] == outputs[1][1],
            cfg.filename().string() + " differs between runs");
    ++count;
  }
  if (o.pass) o.detail = std::to_string(count) + " scenarios byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Tikhonov family of the abs map: two minimizers at +-1/(1+nu)", tikhonov_family},
      {"ridge search certifies nonunique targets (abs, square, semilinear)", ridge_search},
      {"unique solutions on both segments towards a certified pair", segment_uniqueness},
      {"solution map discontinuous at the ridge", discontinuity},
      {"semilinear solver accuracy and non-affinity", semilinear_solver},
      {"parabolic obstacle solver feasibility and consistency", parabolic_solver},
      {"infinity-norm example has a segment of minimizers", linf},
      {"multistart agrees with brute-force grid oracle", oracle_equivalence},
      {"bundled scenarios are reproducible", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[k].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const double dt = seconds_since(t0);
    failures += r.pass ? 0 : 1;
    std::printf("[%s] AC%zu %s (%.2f s)%s%s\n", r.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), dt,
                r.detail.empty() ? "" : " -- ", r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
