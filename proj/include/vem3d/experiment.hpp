// Study driver: configuration files, the (mesh, p, choice, stabilization)
// cross product, CSV reports and SVG error plots.
//
// Configuration grammar (one assignment per line, '#' starts a comment):
//
//   study         = "patch" | "p_study" | "h_study" | "collapse"
//   meshes        = ["cube:2", "collapse:0", "file:path/to.mesh", ...]
//   p             = [1, 2, 3]   or   p = 1..6
//   choices       = ["standard", "orthogonal", "hybrid"]
//   stabs         = ["S1", "S2", "S3"]
//   solution      = "u1" | "u2"
//   out           = "results/dir"
//   condition     = true | false     (estimate kappa, default true)
//   record_timing = true | false     (wall time column, default true)
//
// Strings may be quoted or bare words. Relative file meshes and the output
// directory are resolved against the directory of the configuration file.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vem3d/analysis.hpp"
#include "vem3d/assembly.hpp"
#include "vem3d/mesh.hpp"
#include "vem3d/mesh_generators.hpp"
#include "vem3d/mesh_io.hpp"
#include "vem3d/parallel.hpp"

namespace vem3d {

inline constexpr int kDefaultMaxDegree = 6;
inline constexpr int kExtremeMaxDegree = 10;

struct ExperimentConfig {
  std::string study = "p_study";
  std::vector<std::string> meshes;
  std::vector<int> degrees;
  std::vector<BasisChoice> choices{BasisChoice::standard};
  std::vector<Stabilization> stabs{Stabilization::S2};
  std::string solution = "u1";
  std::string out = "results";
  bool condition = true;
  bool record_timing = true;
  std::filesystem::path base_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

inline std::string unquote(const std::string& tok, int line) {
  std::string t = trim(tok);
  if (t.empty()) throw ParseError("empty value", line);
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') throw ParseError("unterminated string " + t, line);
    return t.substr(1, t.size() - 2);
  }
  return t;
}

inline std::vector<std::string> split_list(const std::string& value, int line) {
  std::string v = trim(value);
  if (v.empty() || v.front() != '[') return {unquote(v, line)};
  if (v.back() != ']') throw ParseError("array is missing ']'", line);
  v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : v) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      out.push_back(unquote(cur, line));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated string in array", line);
  if (!trim(cur).empty()) out.push_back(unquote(cur, line));
  return out;
}

inline int parse_int(const std::string& s, int line) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + s + "'", line);
  }
  if (pos != s.size()) throw ParseError("expected an integer, got '" + s + "'", line);
  return v;
}

inline bool parse_bool(const std::string& s, int line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError("expected true or false, got '" + s + "'", line);
}

inline std::vector<int> parse_degrees(const std::string& value, int line) {
  const std::string v = trim(value);
  const auto dots = v.find("..");
  if (!v.empty() && v.front() != '[' && dots != std::string::npos) {
    const std::string s = unquote(v, line);
    const auto d = s.find("..");
    const int a = parse_int(trim(s.substr(0, d)), line);
    const int b = parse_int(trim(s.substr(d + 2)), line);
    if (b < a) throw ParseError("empty degree range " + s, line);
    std::vector<int> out;
    for (int p = a; p <= b; ++p) out.push_back(p);
    return out;
  }
  std::vector<int> out;
  for (const auto& s : split_list(v, line)) out.push_back(parse_int(s, line));
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".") {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = detail::trim(detail::strip_comment(raw));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", line);
    try {
      if (key == "study") {
        cfg.study = detail::unquote(value, line);
        if (cfg.study != "patch" && cfg.study != "p_study" && cfg.study != "h_study" && cfg.study != "collapse")
          throw ParseError("unknown study '" + cfg.study + "'", line);
      } else if (key == "meshes" || key == "mesh") {
        cfg.meshes = detail::split_list(value, line);
      } else if (key == "p") {
        cfg.degrees = detail::parse_degrees(value, line);
      } else if (key == "choices" || key == "choice") {
        cfg.choices.clear();
        for (const auto& c : detail::split_list(value, line)) cfg.choices.push_back(parse_basis_choice(c));
      } else if (key == "stabs" || key == "stab") {
        cfg.stabs.clear();
        for (const auto& c : detail::split_list(value, line)) cfg.stabs.push_back(parse_stabilization(c));
      } else if (key == "solution") {
        cfg.solution = detail::unquote(value, line);
        exact_solution(cfg.solution);
      } else if (key == "out") {
        cfg.out = detail::unquote(value, line);
      } else if (key == "condition") {
        cfg.condition = detail::parse_bool(detail::unquote(value, line), line);
      } else if (key == "record_timing") {
        cfg.record_timing = detail::parse_bool(detail::unquote(value, line), line);
      } else {
        throw ParseError("unknown key '" + key + "'", line);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
  }
  if (!seen.count("solution") && cfg.study == "patch") cfg.solution = "u2";
  if (cfg.meshes.empty()) throw ParseError("missing 'meshes'", line);
  if (cfg.degrees.empty()) throw ParseError("missing or empty 'p'", line);
  if (cfg.choices.empty()) throw ParseError("empty 'choices'", line);
  if (cfg.stabs.empty()) throw ParseError("empty 'stabs'", line);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return parse_config(in, std::filesystem::path(path).parent_path());
}

/// Checks the degree list against the allowed maximum.
inline void validate_degrees(const ExperimentConfig& cfg, bool allow_extreme_p) {
  const int limit = allow_extreme_p ? kExtremeMaxDegree : kDefaultMaxDegree;
  for (int p : cfg.degrees) {
    if (p < 1) throw InvalidArgument("polynomial degree must be >= 1, got " + std::to_string(p));
    if (p > limit)
      throw InvalidArgument("p = " + std::to_string(p) + " exceeds " + std::to_string(limit) +
                            (allow_extreme_p ? "" : " (use --allow-extreme-p for degrees up to 10)"));
  }
}

/// Mesh from a spec "cube:N", "collapse:K" or "file:path".
inline PolyMesh make_mesh(const std::string& spec, const std::filesystem::path& base_dir = ".") {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidArgument("mesh spec '" + spec + "' needs the form kind:value");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  if (kind == "cube") return build_cube_mesh(detail::parse_int(arg, 0));
  if (kind == "collapse") return build_collapsing_mesh(detail::parse_int(arg, 0));
  if (kind == "file") {
    std::filesystem::path p(arg);
    if (p.is_relative()) p = base_dir / p;
    return load_mesh(p.string());
  }
  throw InvalidArgument("unknown mesh kind '" + kind + "'");
}

struct ReportRow {
  std::string mesh;
  double h = std::nan("");
  int p = 0;
  BasisChoice choice = BasisChoice::standard;
  Stabilization stab = Stabilization::S2;
  double h1_rel = std::nan("");
  double l2_rel = std::nan("");
  double kappa = std::nan("");
  long ndof = 0;
  double seconds = 0.0;
  std::string status = "ok";
  std::string message;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  bool all_ok() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status == "ok"; });
  }
};

inline const char* kReportHeader = "mesh,h,p,choice,stab,h1_rel,l2_rel,kappa,ndof,seconds,status";

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_report_csv(const ExperimentReport& rep, std::ostream& out) {
  out << kReportHeader << '\n';
  for (const auto& r : rep.rows) {
    out << csv_field(r.mesh) << ',' << format_double(r.h) << ',' << r.p << ',' << to_string(r.choice) << ','
        << to_string(r.stab) << ',' << format_double(r.h1_rel) << ',' << format_double(r.l2_rel) << ','
        << format_double(r.kappa) << ',' << r.ndof << ',' << format_double(r.seconds) << ',' << csv_field(r.status)
        << '\n';
  }
}

/// Rates between consecutive meshes for every (p, choice, stab) series.
inline void write_rates_csv(const ExperimentReport& rep, std::ostream& out) {
  out << "p,choice,stab,mesh_coarse,mesh_fine,h1_rate,l2_rate\n";
  std::map<std::tuple<int, int, int>, std::vector<const ReportRow*>> series;
  for (const auto& r : rep.rows)
    if (r.status == "ok")
      series[{r.p, static_cast<int>(r.choice), static_cast<int>(r.stab)}].push_back(&r);
  for (const auto& [key, rows] : series) {
    if (rows.size() < 2) continue;
    std::vector<double> h, e1, e0;
    for (const auto* r : rows) {
      h.push_back(r->h);
      e1.push_back(r->h1_rel);
      e0.push_back(r->l2_rel);
    }
    std::vector<Rate> r1, r0;
    try {
      r1 = convergence_rates(h, e1);
      r0 = convergence_rates(h, e0);
    } catch (const Error&) {
      continue;
    }
    auto fmt = [](const Rate& r) { return r.exact ? std::string("exact") : format_double(r.value); };
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      out << rows[i]->p << ',' << to_string(rows[i]->choice) << ',' << to_string(rows[i]->stab) << ','
          << csv_field(rows[i]->mesh) << ',' << csv_field(rows[i + 1]->mesh) << ',' << fmt(r1[i]) << ','
          << fmt(r0[i]) << '\n';
  }
}

/// Log-scale error plot; x is p (linear) or h (log) depending on the study.
inline void write_error_svg(const ExperimentReport& rep, bool h1, std::ostream& out) {
  const bool h_axis = rep.config.study == "h_study";
  struct Pt {
    double x, y;
  };
  std::map<std::string, std::vector<Pt>> series;
  for (const auto& r : rep.rows) {
    const double e = h1 ? r.h1_rel : r.l2_rel;
    if (r.status != "ok" || !(e > 0.0) || !std::isfinite(e)) continue;
    std::string label = to_string(r.choice) + " " + to_string(r.stab);
    if (h_axis) label += " p=" + std::to_string(r.p);
    else if (rep.config.meshes.size() > 1) label += " " + r.mesh;
    series[label].push_back({h_axis ? std::log10(r.h) : static_cast<double>(r.p), std::log10(e)});
  }
  const double W = 640, H = 420, L = 70, R = 200, T = 30, B = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& [k, pts] : series)
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
  if (series.empty()) x0 = 0, x1 = 1, y0 = -1, y1 = 0;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  y0 = std::floor(y0), y1 = std::ceil(y1);
  if (y1 - y0 < 1) y1 = y0 + 1;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return T + (y1 - y) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                L, T, W - L - R, H - T - B);
  out << buf;
  for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); ++e) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" x2=\"%g\" y1=\"%g\" y2=\"%g\" stroke=\"#ddd\"/><text x=\"%g\" y=\"%g\" "
                  "font-size=\"11\" text-anchor=\"end\">1e%d</text>\n",
                  L, W - R, sy(e), sy(e), L - 5, sy(e) + 4, e);
    out << buf;
  }
  std::set<double> xticks;
  for (const auto& [k, pts] : series)
    for (const auto& p : pts) xticks.insert(p.x);
  for (double x : xticks) {
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%.3g</text>\n",
                  sx(x), H - B + 16, h_axis ? std::pow(10.0, x) : x);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                L + (W - L - R) / 2, H - 12, h_axis ? "h" : "p");
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"13\">%s relative error (%s)</text>\n", L, 20.0,
                h1 ? "H1" : "L2", rep.config.study.c_str());
  out << buf;
  int idx = 0;
  for (const auto& [label, pts] : series) {
    const char* col = colors[idx % 7];
    out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(p.x), sy(p.y));
      out << buf;
    }
    out << "\"/>\n";
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", sx(p.x), sy(p.y), col);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\" fill=\"%s\">%s</text>\n", W - R + 10,
                  T + 14.0 * (idx + 1), col, label.c_str());
    out << buf;
    ++idx;
  }
  out << "</svg>\n";
}

struct RunOptions {
  std::optional<std::string> out;
  int jobs = 1;
  bool allow_extreme_p = false;
};

namespace detail {

inline std::string error_status(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind();
  return "error";
}

}  // namespace detail

/// Runs the full cross product. Failures are recorded per row; a failing
/// mesh or element never stops the remaining rows.
inline ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& opts = {}) {
  validate_degrees(config, opts.allow_extreme_p);
  ExperimentReport rep;
  rep.config = config;
  if (opts.out) rep.config.out = *opts.out;
  const ExactSolution sol = exact_solution(config.solution);

  struct MeshSlot {
    std::unique_ptr<PolyMesh> mesh;
    std::string status, message;
  };
  std::vector<MeshSlot> meshes(config.meshes.size());
  for (std::size_t m = 0; m < config.meshes.size(); ++m) {
    try {
      meshes[m].mesh = std::make_unique<PolyMesh>(make_mesh(config.meshes[m], config.base_dir));
    } catch (const std::exception& e) {
      meshes[m].status = detail::error_status(e);
      meshes[m].message = e.what();
    }
  }

  // One task per (mesh, p, choice); it fills the rows of every stabilization.
  struct Task {
    std::size_t mesh;
    int p;
    BasisChoice choice;
    std::size_t first_row;
  };
  std::vector<Task> tasks;
  for (std::size_t m = 0; m < config.meshes.size(); ++m)
    for (int p : config.degrees)
      for (BasisChoice ch : config.choices) {
        tasks.push_back({m, p, ch, rep.rows.size()});
        for (Stabilization st : config.stabs) {
          ReportRow row;
          row.mesh = config.meshes[m];
          row.p = p;
          row.choice = ch;
          row.stab = st;
          rep.rows.push_back(row);
        }
      }

  const int jobs = std::max(1, opts.jobs);
  const int inner_threads = jobs > 1 ? 1 : 0;
  parallel_for(
      static_cast<int>(tasks.size()),
      [&](int t) {
        const Task& task = tasks[t];
        const auto& slot = meshes[task.mesh];
        for (std::size_t s = 0; s < config.stabs.size(); ++s) {
          ReportRow& row = rep.rows[task.first_row + s];
          if (!slot.mesh) {
            row.status = slot.status;
            row.message = slot.message;
            continue;
          }
          row.h = slot.mesh->mesh_size();
        }
        if (!slot.mesh) return;
        const auto start = std::chrono::steady_clock::now();
        std::optional<Discretization> disc;
        try {
          disc.emplace(discretize(*slot.mesh, task.p, task.choice, inner_threads));
        } catch (const std::exception& e) {
          for (std::size_t s = 0; s < config.stabs.size(); ++s) {
            rep.rows[task.first_row + s].status = detail::error_status(e);
            rep.rows[task.first_row + s].message = e.what();
          }
          return;
        }
        const double setup = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t s = 0; s < config.stabs.size(); ++s) {
          ReportRow& row = rep.rows[task.first_row + s];
          const auto t0 = std::chrono::steady_clock::now();
          try {
            row.ndof = disc->dofs.count;
            const SparseSystem sys = assemble(*disc, config.stabs[s], sol.f, sol.u, inner_threads);
            const SolveResult res = solve(sys);
            const VectorXd uh = full_solution(sys, res.x);
            const ErrorReport err = compute_errors(*disc, uh, sol.u, sol.grad, inner_threads);
            row.h1_rel = err.h1_relative;
            row.l2_rel = err.l2_relative;
            if (config.condition && sys.A.rows() > 0) row.kappa = estimate_condition(sys.A).kappa;
            row.status = "ok";
          } catch (const std::exception& e) {
            row.status = detail::error_status(e);
            row.message = e.what();
          }
          const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          row.seconds = config.record_timing ? dt + setup / config.stabs.size() : 0.0;
        }
      },
      jobs);
  return rep;
}

/// Writes report.csv, rates.csv (h studies) and the two SVG plots.
inline void write_outputs(const ExperimentReport& rep) {
  namespace fs = std::filesystem;
  fs::path dir(rep.config.out);
  if (dir.is_relative()) dir = rep.config.base_dir / dir;
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv", std::ios::binary);
    write_report_csv(rep, out);
  }
  if (rep.config.study == "h_study") {
    std::ofstream out(dir / "rates.csv", std::ios::binary);
    write_rates_csv(rep, out);
  }
  {
    std::ofstream out(dir / (rep.config.study + "_h1.svg"), std::ios::binary);
    write_error_svg(rep, true, out);
  }
  {
    std::ofstream out(dir / (rep.config.study + "_l2.svg"), std::ios::binary);
    write_error_svg(rep, false, out);
  }
}

}  // namespace vem3d
