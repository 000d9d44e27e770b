#pragma once

// Machine-readable report emission. JSON documents keep insertion order and
// print every floating value with 17 significant digits, so parsing a report
// and printing it again reproduces the same bytes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tracklab/explorer.hpp"

namespace tracklab {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";  // also folds -0, which would not survive a parse/print cycle
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

inline void dump_value(const Json& j, std::ostringstream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      break;
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return is_scalar(e); });
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          dump_value(j[i], os, indent);
        }
        os << ']';
      } else {
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
          os << pad;
          dump_value(j[i], os, indent + 2);
          os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << close << ']';
      }
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        os << pad << Json(it.key()).dump() << ": ";
        dump_value(it.value(), os, indent + 2);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      os << close << '}';
      break;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline std::string dump_json(const Json& j) {
  std::ostringstream os;
  detail::dump_value(j, os, 0);
  os << '\n';
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report file " + path.string());
  out << text;
  if (!out.flush()) throw Error("failed while writing report file " + path.string());
}

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const Cluster& c, std::size_t id, bool global) {
  return Json{{"cluster_id", id}, {"J", c.J}, {"members", c.members}, {"global", global}, {"u", to_json(c.u)}};
}

inline Json to_json(const MultistartReport& r) {
  Json clusters = Json::array();
  for (std::size_t k = 0; k < r.clusters.size(); ++k) clusters.push_back(to_json(r.clusters[k], k, k < r.global_clusters.size()));
  return Json{{"seed", r.seed},
              {"n_starts", r.n_starts},
              {"n_converged", r.n_converged},
              {"n_failed", r.n_failed},
              {"total_iterations", r.total_iterations},
              {"global_count", r.global_clusters.size()},
              {"clusters", clusters}};
}

inline Json to_json(const SolutionPair& p) {
  return Json{{"first", {{"J", p.J_first}, {"y", to_json(p.y_first)}, {"u", to_json(p.u_first)}}},
              {"second", {{"J", p.J_second}, {"y", to_json(p.y_second)}, {"u", to_json(p.u_second)}}}};
}

inline Json to_json(const TargetTuple& t) { return Json{{"y_d", to_json(t.y_d)}, {"u_d", to_json(t.u_d)}}; }

inline Json to_json(const NonuniqueResult& r) {
  return Json{{"s", r.s},
              {"bisection_steps", r.bisection_steps},
              {"target", to_json(r.target)},
              {"pair", to_json(r.pair)},
              {"separation", r.separation},
              {"delta_J", r.pair.J_first - r.pair.J_second},
              {"ridge_multistart", to_json(r.ridge_report)}};
}

inline Json to_json(const SegmentReport& s) {
  Json records = Json::array();
  for (const auto& e : s.entries) {
    records.push_back(Json{{"t", e.t},
                           {"global_count", e.global_count},
                           {"J", e.J},
                           {"distance", e.distance},
                           {"oracle_count", e.oracle_count},
                           {"oracle_agrees", e.oracle_agrees},
                           {"pass", e.pass},
                           {"u", to_json(e.u_rep)}});
  }
  Json t_values = Json::array();
  for (double t : s.t_values) t_values.push_back(t);
  return Json{{"t_values", t_values}, {"records", records}, {"verdict", s.verdict}};
}

inline Json to_json(const WitnessReport& w) {
  Json entries = Json::array();
  for (const auto& e : w.entries) {
    entries.push_back(Json{{"t", e.t},
                           {"distance_first", e.distance_first},
                           {"distance_second", e.distance_second},
                           {"count_first", e.count_first},
                           {"count_second", e.count_second},
                           {"gap", e.gap},
                           {"u_first", to_json(e.u_first)},
                           {"u_second", to_json(e.u_second)}});
  }
  return Json{{"separation", w.separation}, {"certified", w.certified}, {"entries", entries}};
}

inline Json to_json(const std::vector<SweepRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json reps = Json::array();
    for (const auto& u : r.representatives) reps.push_back(to_json(u));
    a.push_back(Json{{"nu", r.nu}, {"global_count", r.global_count}, {"J", r.J}, {"representatives", reps}});
  }
  return a;
}

inline Json to_json(const ScanReport& s) {
  auto axis = [](const ScanAxis& a) { return Json{{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}}; };
  auto cell = [](const ScanCell& c) {
    return Json{{"y_d", c.a}, {"u_d", c.b}, {"multiplicity", c.multiplicity}, {"J", c.J}};
  };
  Json cells = Json::array(), exceptional = Json::array();
  for (const auto& c : s.cells) cells.push_back(cell(c));
  for (const auto& c : s.exceptional) exceptional.push_back(cell(c));
  return Json{{"y_d_axis", axis(s.a_axis)}, {"u_d_axis", axis(s.b_axis)}, {"cells", cells}, {"exceptional_set", exceptional}};
}

inline Json to_json(const LinfDemoResult& r) {
  Json pts = Json::array();
  for (const auto& u : r.near_optimal) pts.push_back(to_json(u));
  return Json{{"resolution", r.resolution},
              {"J_best", r.J_best},
              {"u_best", to_json(r.u_best)},
              {"near_optimal_count", r.near_optimal.size()},
              {"near_optimal", pts}};
}

// ---------------------------------------------------------------------------
// CSV. The first line is a comment documenting the columns.

inline std::string csv_multistart(const MultistartReport& r) {
  std::ostringstream os;
  const Index dim = r.clusters.empty() ? 0 : r.clusters.front().u.size();
  os << "# columns: seed,n_starts,cluster_id,J,u_0..u_" << (dim - 1) << " (clusters sorted by J; the first "
     << r.global_clusters.size() << " are global)\n";
  os << "seed,n_starts,cluster_id,J";
  for (Index i = 0; i < dim; ++i) os << ",u_" << i;
  os << '\n';
  for (std::size_t k = 0; k < r.clusters.size(); ++k) {
    os << r.seed << ',' << r.n_starts << ',' << k << ',' << format_double(r.clusters[k].J);
    for (Index i = 0; i < dim; ++i) os << ',' << format_double(r.clusters[k].u[i]);
    os << '\n';
  }
  return os.str();
}

inline std::string csv_scan(const ScanReport& s) {
  std::ostringstream os;
  os << "# columns: y_d,u_d,multiplicity (target amplitudes; multiplicity = number of global clusters)\n";
  os << "y_d,u_d,multiplicity\n";
  for (const auto& c : s.cells) os << format_double(c.a) << ',' << format_double(c.b) << ',' << c.multiplicity << '\n';
  return os.str();
}

inline std::string csv_sweep(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  const Index dim = rows.empty() || rows.front().representatives.empty() ? 0 : rows.front().representatives.front().size();
  os << "# columns: nu,global_count,J,rep_id,u_0..u_" << (dim - 1) << '\n';
  os << "nu,global_count,J,rep_id";
  for (Index i = 0; i < dim; ++i) os << ",u_" << i;
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.representatives.size(); ++k) {
      os << format_double(r.nu) << ',' << r.global_count << ',' << format_double(r.J) << ',' << k;
      for (Index i = 0; i < r.representatives[k].size(); ++i) os << ',' << format_double(r.representatives[k][i]);
      os << '\n';
    }
  }
  return os.str();
}

inline std::string csv_points(const std::vector<Vector>& pts, const std::string& comment) {
  std::ostringstream os;
  const Index dim = pts.empty() ? 0 : pts.front().size();
  os << "# columns: " << comment << '\n';
  for (Index i = 0; i < dim; ++i) os << (i ? "," : "") << "u_" << (i + 1);
  os << '\n';
  for (const auto& p : pts) {
    for (Index i = 0; i < p.size(); ++i) os << (i ? "," : "") << format_double(p[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace tracklab
