#pragma once

// JSON scenario files: map + problem + solver options + one experiment.
// run_scenario() executes the experiment and writes result.json, an optional
// result.csv and a human-readable summary.txt into the output directory.
//
// Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
// 1 any other failure (including experiment preconditions not met).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tracklab/maps_pde.hpp"
#include "tracklab/report.hpp"

namespace tracklab {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& map_names() {
  static const std::vector<std::string> names{"affine", "abs", "square", "semilinear1d", "parabolic-obstacle"};
  return names;
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"solve",   "scan",      "segment",       "affinity",
                                              "sweep-nu", "linf-demo", "find-nonunique"};
  return names;
}

namespace detail {

inline std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : ", ") + x;
  return s;
}

inline bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config: field '") + key + "' has the wrong type");
  }
}

inline const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError("config: missing field '" + std::string(key) + "' in " + where);
  return j.at(key);
}

inline std::vector<double> number_list(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ValidationError("config: " + what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ValidationError("config: " + what + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Matrix matrix_from(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError("config: " + what + " must be a nonempty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = number_list(j[0], what + " row").size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = number_list(j[r], what + " row");
    if (row.size() != cols) throw ValidationError("config: " + what + " rows have unequal length");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
  }
  return m;
}

}  // namespace detail

/// Everything a scenario needs after validation.
struct Scenario {
  Json config;
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path output;
  MapPtr map;
  Vector state_profile;    // sin(pi x) sampled where a "sin" field refers to the state
  Vector control_profile;  // likewise for controls
  std::optional<Mesh1D> mesh;
  TrackingProblem problem;
  MultistartOptions solver;
  OracleCheck oracle;
  std::string config_hash;
};

namespace detail {

inline std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Numbers broadcast, arrays are taken verbatim, {"sin": a} samples a sin(pi x).
inline Vector field(const Json& j, Index dim, const Vector& profile, const std::string& what) {
  if (j.is_number()) return Vector::Constant(dim, j.get<double>());
  if (j.is_array()) {
    const auto xs = number_list(j, what);
    if (static_cast<Index>(xs.size()) != dim) {
      throw ValidationError("config: " + what + " has " + std::to_string(xs.size()) + " entries, expected " +
                            std::to_string(dim));
    }
    return Eigen::Map<const Vector>(xs.data(), dim);
  }
  if (j.is_object() && j.contains("sin")) {
    if (!j.at("sin").is_number()) throw ValidationError("config: " + what + ".sin must be a number");
    return j.at("sin").get<double>() * profile;
  }
  throw ValidationError("config: " + what + " must be a number, an array, or {\"sin\": amplitude}");
}

inline Vector unit_interval_sine(Index dim) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = std::sin(std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(dim + 1));
  return v;
}

struct BuiltMap {
  MapPtr map;
  std::optional<Mesh1D> mesh;
  Norm state_norm = GridNorm(1.0);
  Norm control_norm = GridNorm(1.0);
  bool has_grid_norms = false;
  Vector state_profile, control_profile;
};

inline BuiltMap build_map(const Json& m) {
  if (!m.is_object()) throw ValidationError("config: 'map' must be an object");
  const std::string name = get_or<std::string>(m, "name", "");
  if (!contains(map_names(), name)) {
    throw ValidationError("config: unknown map '" + name + "'; valid maps: " + join(map_names()));
  }
  BuiltMap b;
  if (name == "affine") {
    if (m.contains("matrix")) {
      Matrix K = matrix_from(m.at("matrix"), "map.matrix");
      Vector c = m.contains("offset") ? field(m.at("offset"), K.rows(), Vector::Zero(K.rows()), "map.offset")
                                      : Vector::Zero(K.rows());
      b.map = std::make_shared<AffineMap>(std::move(K), std::move(c));
    } else {
      const auto dim = get_or<Index>(m, "dim", 1);
      require(dim >= 1, "config: map.dim must be positive");
      b.map = std::make_shared<AffineMap>(AffineMap::identity(dim));
    }
  } else if (name == "abs" || name == "square") {
    const auto dim = get_or<Index>(m, "dim", 1);
    require(dim >= 1, "config: map.dim must be positive");
    if (name == "abs") b.map = std::make_shared<AbsMap>(dim);
    else b.map = std::make_shared<SquareMap>(dim);
  } else if (name == "semilinear1d") {
    const Mesh1D mesh(get_or<Index>(m, "n", 99));
    SemilinearConfig cfg(mesh, get_or<double>(m, "newton_tol", 1e-10), get_or<int>(m, "max_iter", 50));
    b.map = std::make_shared<CachedMap>(std::make_shared<SemilinearMap>(cfg));
    b.mesh = mesh;
    b.state_norm = GridNorm(mesh.h);
    b.control_norm = GridNorm(mesh.h);
    b.has_grid_norms = true;
    b.state_profile = b.control_profile = sine_profile(mesh);
  } else {  // parabolic-obstacle
    const Mesh1D mesh(get_or<Index>(m, "n", 19));
    const double T = get_or<double>(m, "T", 0.5);
    const auto n_t = get_or<Index>(m, "n_t", 10);
    Index w0 = 0, w1 = mesh.n;
    if (m.contains("window")) {
      const auto w = number_list(m.at("window"), "map.window");
      require(w.size() == 2, "config: map.window must be [begin, end)");
      w0 = static_cast<Index>(w[0]);
      w1 = static_cast<Index>(w[1]);
    }
    const Vector psi = m.contains("psi") ? field(m.at("psi"), mesh.n, sine_profile(mesh), "map.psi")
                                         : Vector::Constant(mesh.n, -0.01);
    ParabolicGrid grid(mesh, T, n_t, w0, w1, psi);
    const double tau = grid.tau();
    Vector window_sine(grid.control_dim());
    for (Index k = 0; k < n_t; ++k) {
      for (Index j = 0; j < grid.window_size(); ++j) window_sine[k * grid.window_size() + j] = std::sin(std::numbers::pi * mesh.node(w0 + j));
    }
    b.map = std::make_shared<CachedMap>(std::make_shared<ParabolicObstacleMap>(
        grid, get_or<double>(m, "psor_tol", 1e-9), get_or<int>(m, "psor_max_iter", 200000)));
    b.mesh = mesh;
    b.state_norm = GridNorm(mesh.h);
    b.control_norm = GridNorm(mesh.h * tau);
    b.has_grid_norms = true;
    b.state_profile = sine_profile(mesh);
    b.control_profile = window_sine;
  }
  if (!b.has_grid_norms) {
    b.state_profile = unit_interval_sine(b.map->output_dim());
    b.control_profile = unit_interval_sine(b.map->input_dim());
  }
  return b;
}

inline Box build_box(const Json& j, Index dim) {
  if (!j.is_array() || j.empty()) throw ValidationError("config: solver.box must be [lo, hi] or a list of [lo, hi]");
  if (j[0].is_number()) {
    const auto lh = number_list(j, "solver.box");
    require(lh.size() == 2, "config: solver.box must be [lo, hi]");
    return Box::uniform(dim, lh[0], lh[1]);
  }
  require(static_cast<Index>(j.size()) == dim, "config: solver.box needs one interval per control component");
  Vector lo(dim), hi(dim);
  for (Index i = 0; i < dim; ++i) {
    const auto lh = number_list(j[static_cast<std::size_t>(i)], "solver.box entry");
    require(lh.size() == 2, "config: solver.box entries must be [lo, hi]");
    lo[i] = lh[0];
    hi[i] = lh[1];
  }
  return Box(lo, hi);
}

}  // namespace detail

/// Parses and validates a scenario document. Throws ValidationError.
inline Scenario load_scenario(const Json& config, const std::string& raw_text, const std::string& stem) {
  using namespace detail;
  if (!config.is_object()) throw ValidationError("config: top level must be an object");
  const std::string experiment = get_or<std::string>(config, "experiment", "");
  if (!contains(experiment_names(), experiment)) {
    throw ValidationError("config: unknown experiment '" + experiment + "'; valid experiments: " +
                          join(experiment_names()));
  }

  if (experiment == "linf-demo") {
    // Self-contained: the infinity-norm example needs no map or problem block.
    auto map = std::make_shared<AffineMap>(AffineMap::identity(2));
    Scenario s{config, experiment, get_or<std::uint64_t>(config, "seed", 0),
               get_or<std::string>(config, "output", "out/" + stem), map, Vector(), Vector(), std::nullopt,
               TrackingProblem::euclidean(map, Vector::Zero(2), Vector::Zero(2)), {}, {}, fnv_hex(raw_text)};
    const auto res = get_or<Index>(config.value("linf", Json::object()), "resolution", 301);
    require(res >= 100, "config: linf.resolution must be at least 100");
    return s;
  }

  BuiltMap built = build_map(need(config, "map", "scenario"));
  const Json& pj = need(config, "problem", "scenario");
  const double p = get_or<double>(pj, "p", 2.0);
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ValidationError("config: problem.p = " + format_double(p) + " is outside the admissible range p in (1, inf)");
  }
  const double nu = get_or<double>(pj, "nu", 1.0);
  require(nu > 0.0 && std::isfinite(nu), "config: problem.nu must be positive");
  const Index ny = built.map->output_dim(), nu_dim = built.map->input_dim();
  const Vector y_d = field(need(pj, "y_d", "problem"), ny, built.state_profile, "problem.y_d");
  const Vector u_d = field(need(pj, "u_d", "problem"), nu_dim, built.control_profile, "problem.u_d");

  Norm state_norm = built.state_norm, control_norm = built.control_norm;
  const double state_scale = get_or<double>(pj, "state_scale", 1.0);
  const double control_scale = get_or<double>(pj, "control_scale", 1.0);
  if (built.has_grid_norms) {
    require(!pj.contains("state_weight") && !pj.contains("control_weight"),
            "config: weight matrices are only supported for analytic maps");
    state_norm = GridNorm(std::get<GridNorm>(state_norm).h(), 2.0, state_scale);
    control_norm = GridNorm(std::get<GridNorm>(control_norm).h(), 2.0, control_scale);
  } else {
    const Matrix A = pj.contains("state_weight") ? matrix_from(pj.at("state_weight"), "problem.state_weight")
                                                 : Matrix::Identity(ny, ny);
    const Matrix B = pj.contains("control_weight") ? matrix_from(pj.at("control_weight"), "problem.control_weight")
                                                   : Matrix::Identity(nu_dim, nu_dim);
    state_norm = WeightedNorm(A, state_scale);
    control_norm = WeightedNorm(B, control_scale);
  }
  TrackingProblem problem(built.map, y_d, u_d, p, state_norm, control_norm);
  problem = rescale_nu(problem, nu);

  const Json sj = config.value("solver", Json::object());
  MultistartOptions ms;
  ms.n_starts = get_or<Index>(sj, "n_starts", 64);
  require(ms.n_starts >= 1, "config: solver.n_starts must be at least 1");
  ms.seed = get_or<std::uint64_t>(config, "seed", 0);
  ms.box = sj.contains("box") ? build_box(sj.at("box"), nu_dim) : Box::uniform(nu_dim, -2.0, 2.0);
  ms.local.grad_tol = get_or<double>(sj, "grad_tol", 1e-8);
  ms.local.step_tol = get_or<double>(sj, "step_tol", 1e-12);
  ms.local.max_iter = get_or<int>(sj, "max_iter", 5000);
  ms.local.fd_step = get_or<double>(sj, "fd_step", 1e-6);
  ms.tol_u = get_or<double>(sj, "tol_u", 1e-4);
  ms.tol_J = get_or<double>(sj, "tol_J", 1e-7);
  ms.threads = get_or<unsigned>(sj, "threads", 1);
  require(ms.local.grad_tol > 0 && ms.local.step_tol > 0 && ms.local.fd_step > 0 && ms.local.max_iter >= 1,
          "config: solver tolerances and max_iter must be positive");
  require(ms.tol_u > 0 && ms.tol_J >= 0, "config: solver.tol_u must be positive and tol_J nonnegative");

  OracleCheck oracle;
  oracle.enabled = get_or<bool>(sj, "oracle", true);
  oracle.points_per_dim = get_or<Index>(sj, "oracle_points", nu_dim == 1 ? 4001 : 201);
  oracle.tol = get_or<double>(sj, "oracle_tol", 1e-6);

  Scenario s{config,
             experiment,
             ms.seed,
             get_or<std::string>(config, "output", "out/" + stem),
             built.map,
             built.state_profile,
             built.control_profile,
             built.mesh,
             std::move(problem),
             ms,
             oracle,
             fnv_hex(raw_text)};

  // Experiment-specific blocks are validated up front so `validate` catches them.
  if (experiment == "find-nonunique" || experiment == "segment") {
    const Json& path = need(config, "path", "scenario");
    for (const char* end : {"from", "to"}) {
      const Json& e = need(path, end, "path");
      field(need(e, "y_d", std::string("path.") + end), ny, s.state_profile, std::string("path.") + end + ".y_d");
      field(need(e, "u_d", std::string("path.") + end), nu_dim, s.control_profile, std::string("path.") + end + ".u_d");
    }
  }
  if (experiment == "segment") {
    const auto ts = number_list(need(need(config, "segment", "scenario"), "t_values", "segment"), "segment.t_values");
    for (double t : ts) require(t > 0.0 && t < 1.0, "config: segment.t_values must lie in (0, 1)");
  }
  if (experiment == "scan") {
    const Json& sc = need(config, "scan", "scenario");
    for (const char* axis : {"y_d", "u_d"}) {
      const Json& a = need(sc, axis, "scan");
      require(get_or<Index>(a, "count", 0) >= 1, std::string("config: scan.") + axis + ".count must be positive");
    }
  }
  if (experiment == "sweep-nu") {
    const auto nus = number_list(need(need(config, "sweep", "scenario"), "nu", "sweep"), "sweep.nu");
    require(!nus.empty(), "config: sweep.nu must not be empty");
    for (double v : nus) require(v > 0.0, "config: sweep.nu values must be positive");
  }
  if (experiment == "affinity") {
    const Json& a = need(config, "affinity", "scenario");
    if (get_or<std::string>(a, "controls", "") == "counterexample") {
      require(s.mesh.has_value() && built.map->name() == "semilinear1d",
              "config: affinity.controls = \"counterexample\" requires the semilinear1d map");
    } else {
      field(need(a, "u1", "affinity"), nu_dim, s.control_profile, "affinity.u1");
      field(need(a, "u2", "affinity"), nu_dim, s.control_profile, "affinity.u2");
    }
  }
  return s;
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
};

inline Scenario load_scenario_file(const std::filesystem::path& path, const RunOverrides& overrides = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Json config;
  try {
    config = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  if (overrides.seed) config["seed"] = *overrides.seed;
  if (overrides.output) config["output"] = overrides.output->string();
  return load_scenario(config, text, path.stem().string());
}

namespace detail {

inline std::vector<double> lambda_list(const Json& j, const char* key, std::vector<double> fallback) {
  return j.contains(key) ? number_list(j.at(key), key) : fallback;
}

inline TargetTuple target_from(const Scenario& s, const Json& j, const std::string& where) {
  return {field(j.at("y_d"), s.problem.state_dim(), s.state_profile, where + ".y_d"),
          field(j.at("u_d"), s.problem.control_dim(), s.control_profile, where + ".u_d")};
}

inline std::string vec_str(const Vector& v, Index max_items = 4) {
  std::ostringstream os;
  os << std::setprecision(10) << '(';
  for (Index i = 0; i < std::min(v.size(), max_items); ++i) os << (i ? ", " : "") << v[i];
  if (v.size() > max_items) os << ", ... [" << v.size() << " entries]";
  os << ')';
  return os.str();
}

}  // namespace detail

struct ExperimentOutput {
  Json result;
  std::optional<std::string> csv;
  std::string summary;
};

/// Runs the scenario's experiment. Throws on failure.
inline ExperimentOutput run_experiment(const Scenario& s) {
  using namespace detail;
  ExperimentOutput out;
  std::ostringstream sum;
  sum << std::setprecision(12);
  const auto& cfg = s.config;
  const auto& prob = s.problem;

  if (s.experiment == "solve") {
    const MultistartReport r = multistart(prob, s.solver);
    out.result["multistart"] = to_json(r);
    out.csv = csv_multistart(r);
    sum << "global minimizers: " << r.global_clusters.size() << " (of " << r.clusters.size() << " clusters, "
        << r.n_converged << "/" << r.n_starts << " starts converged)\n";
    for (const auto& c : r.global_clusters) sum << "  u = " << vec_str(c.u) << "  J = " << c.J << '\n';
    if (s.oracle.enabled && prob.control_dim() <= 2) {
      const GridOracleResult g = grid_oracle(prob, s.solver.box, s.oracle.points_per_dim, s.oracle.tol);
      const auto oc = oracle_clusters(g);
      Json reps = Json::array();
      for (const auto& c : oc) reps.push_back(to_json(c.u));
      out.result["oracle"] = Json{{"points_per_dim", s.oracle.points_per_dim},
                                  {"J_best", g.J_best},
                                  {"cluster_count", oc.size()},
                                  {"representatives", reps}};
      sum << "grid oracle: J_best = " << g.J_best << ", " << oc.size() << " near-optimal cluster(s)\n";
    }
  } else if (s.experiment == "find-nonunique" || s.experiment == "segment") {
    const Json& pj = cfg.at("path");
    const TargetPath path = line_path(target_from(s, pj.at("from"), "path.from"), target_from(s, pj.at("to"), "path.to"));
    const NonuniqueResult nr = find_nonunique_target(prob, path, s.solver, get_or<double>(pj, "bisect_tol", 1e-10));
    out.result["ridge"] = to_json(nr);
    sum << "certified nonunique target at path parameter s = " << nr.s << " (" << nr.bisection_steps
        << " bisection steps)\n"
        << "  u_d = " << vec_str(nr.target.u_d) << "\n  y_d = " << vec_str(nr.target.y_d) << '\n'
        << "  solution 1: u = " << vec_str(nr.pair.u_first) << "  J = " << nr.pair.J_first << '\n'
        << "  solution 2: u = " << vec_str(nr.pair.u_second) << "  J = " << nr.pair.J_second << '\n'
        << "  separation = " << nr.separation << ", |dJ| = " << std::abs(nr.pair.J_first - nr.pair.J_second) << '\n';
    if (s.experiment == "segment") {
      const Json& sj = cfg.at("segment");
      const auto ts = number_list(sj.at("t_values"), "segment.t_values");
      const TrackingProblem ridge = prob.with_target(nr.target);
      const auto [first, second] = verify_segment_uniqueness(ridge, nr.pair, ts, s.solver, s.oracle);
      out.result["segments"] = Json::array({to_json(first), to_json(second)});
      sum << "segment uniqueness: first " << (first.verdict ? "PASS" : "FAIL") << ", second "
          << (second.verdict ? "PASS" : "FAIL") << " over " << ts.size() << " t values\n";
      const auto witness_n = get_or<int>(sj, "witness_n", 0);
      if (witness_n > 0) {
        std::vector<double> tn;
        for (int k = 1; k <= witness_n; ++k) tn.push_back(std::ldexp(1.0, -k));
        const WitnessReport w = discontinuity_witness(ridge, nr.pair, tn, s.solver);
        out.result["witness"] = to_json(w);
        sum << "discontinuity witness (t_n = 2^-n, n = 1.." << witness_n << "): "
            << (w.certified ? "certified" : "NOT certified") << ", final gap " << w.entries.back().gap
            << ", final target distance " << w.entries.back().distance_first << '\n';
      }
    }
  } else if (s.experiment == "affinity") {
    const Json& aj = cfg.at("affinity");
    Vector u1, u2;
    Json extra = Json::object();
    if (get_or<std::string>(aj, "controls", "") == "counterexample") {
      const Vector z = sine_profile(*s.mesh);
      std::tie(u1, u2) = counterexample_controls(z, *s.mesh);
      extra["S_u1_minus_2z_sup"] = (prob.map()(u1) - 2.0 * z).lpNorm<Eigen::Infinity>();
      extra["S_u2_plus_2z_sup"] = (prob.map()(u2) + 2.0 * z).lpNorm<Eigen::Infinity>();
    } else {
      u1 = field(aj.at("u1"), prob.control_dim(), s.control_profile, "affinity.u1");
      u2 = field(aj.at("u2"), prob.control_dim(), s.control_profile, "affinity.u2");
    }
    const auto lambdas = lambda_list(aj, "lambdas", {0.5});
    const auto alphas = lambda_list(aj, "alphas", {-1.0, 0.5, 2.0});
    const double a_def = affinity_defect(prob.map(), prob.state_norm(), u1, u2, lambdas);
    const double l_def = linearity_defect(prob.map(), prob.state_norm(), u1, alphas);
    out.result["affinity_defect"] = a_def;
    out.result["linearity_defect"] = l_def;
    out.result["declared_affine"] = prob.map().is_affine();
    for (auto it = extra.begin(); it != extra.end(); ++it) out.result[it.key()] = it.value();
    sum << "affinity defect = " << a_def << "\nlinearity defect = " << l_def << '\n';
    for (auto it = extra.begin(); it != extra.end(); ++it) sum << it.key() << " = " << it.value().get<double>() << '\n';
  } else if (s.experiment == "sweep-nu") {
    const auto nus = number_list(cfg.at("sweep").at("nu"), "sweep.nu");
    const auto rows = tikhonov_sweep(prob, nus, s.solver);
    out.result["sweep"] = to_json(rows);
    out.csv = csv_sweep(rows);
    for (const auto& r : rows) {
      sum << "nu = " << r.nu << ": " << r.global_count << " global minimizer(s), J = " << r.J;
      for (const auto& u : r.representatives) sum << "  " << vec_str(u);
      sum << '\n';
    }
  } else if (s.experiment == "scan") {
    const Json& sc = cfg.at("scan");
    auto axis = [&](const char* key) {
      const Json& a = sc.at(key);
      return ScanAxis{get_or<double>(a, "lo", 0.0), get_or<double>(a, "hi", 0.0), get_or<Index>(a, "count", 1)};
    };
    const Vector y_shape = sc.contains("y_shape") ? field(sc.at("y_shape"), prob.state_dim(), s.state_profile, "scan.y_shape")
                                                  : Vector::Ones(prob.state_dim());
    const Vector u_shape = sc.contains("u_shape")
                               ? field(sc.at("u_shape"), prob.control_dim(), s.control_profile, "scan.u_shape")
                               : Vector::Ones(prob.control_dim());
    const ScanReport r = chebyshev_scan(prob, scaled_target_family(y_shape, u_shape), axis("y_d"), axis("u_d"), s.solver);
    out.result["scan"] = to_json(r);
    out.csv = csv_scan(r);
    sum << "scanned " << r.cells.size() << " targets; exceptional set (multiplicity >= 2): " << r.exceptional.size()
        << " target(s)\n";
    for (const auto& c : r.exceptional) sum << "  y_d = " << c.a << ", u_d = " << c.b << ": " << c.multiplicity << '\n';
  } else if (s.experiment == "linf-demo") {
    const auto res = get_or<Index>(cfg.value("linf", Json::object()), "resolution", 301);
    const LinfDemoResult r = linf_demo(res);
    out.result["linf"] = to_json(r);
    out.csv = csv_points(r.near_optimal, "u_1,u_2 near-optimal grid points (J <= J_best + 1e-6)");
    sum << "J_best = " << r.J_best << " at " << vec_str(r.u_best) << "; " << r.near_optimal.size()
        << " near-optimal grid points\n";
  }
  out.summary = sum.str();
  return out;
}

/// Loads, runs and writes reports. Returns the process exit code.
inline int run_scenario(const std::filesystem::path& config_path, const RunOverrides& overrides = {},
                        std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    const Scenario s = load_scenario_file(config_path, overrides);
    const auto start = std::chrono::steady_clock::now();
    ExperimentOutput res = run_experiment(s);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json doc;
    doc["provenance"] = Json{{"tool", "tracklab"},
                             {"version", kVersion},
                             {"config", config_path.filename().string()},
                             {"config_hash", s.config_hash},
                             {"experiment", s.experiment},
                             {"seed", s.seed}};
    for (auto it = res.result.begin(); it != res.result.end(); ++it) doc[it.key()] = it.value();
    write_text(s.output / "result.json", dump_json(doc));
    if (res.csv) write_text(s.output / "result.csv", *res.csv);
    std::ostringstream summary;
    summary << "tracklab " << kVersion << "  experiment: " << s.experiment << "  config: " << config_path.filename().string()
            << " (hash " << s.config_hash << ")  seed: " << s.seed << '\n'
            << res.summary << "wall-clock: " << std::fixed << std::setprecision(3) << seconds << " s\n";
    write_text(s.output / "summary.txt", summary.str());
    log << summary.str();
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    err << "solver did not converge: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int validate_scenario(const std::filesystem::path& config_path, std::ostream& log = std::cout,
                             std::ostream& err = std::cerr) {
  try {
    const Scenario s = load_scenario_file(config_path);
    log << config_path.string() << ": ok (experiment " << s.experiment << ", map " << s.problem.map().name() << ")\n";
    return 0;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tracklab
