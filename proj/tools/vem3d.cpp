// Command line front end: study runs and mesh utilities.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vem3d/vem3d.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out, int jobs, bool allow_extreme_p) {
  vem3d::ExperimentConfig cfg = vem3d::load_config(config_path);
  vem3d::RunOptions opts;
  if (!out.empty()) opts.out = std::filesystem::absolute(out).string();
  opts.jobs = jobs;
  opts.allow_extreme_p = allow_extreme_p;
  for (int p : cfg.degrees)
    if (p > vem3d::kDefaultMaxDegree && allow_extreme_p) {
      std::cerr << "warning: p > " << vem3d::kDefaultMaxDegree
                << " is badly conditioned for the standard choice; results may be dominated by round-off\n";
      break;
    }
  const vem3d::ExperimentReport rep = vem3d::run_experiment(cfg, opts);
  vem3d::write_outputs(rep);
  int failed = 0;
  for (const auto& r : rep.rows) {
    if (r.status == "ok") continue;
    ++failed;
    std::cerr << r.mesh << " p=" << r.p << " " << vem3d::to_string(r.choice) << " " << vem3d::to_string(r.stab)
              << ": " << r.status << ": " << r.message << "\n";
  }
  std::cout << rep.rows.size() << " rows, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

int check_command(const std::string& path) {
  const vem3d::PolyMesh mesh = vem3d::load_mesh(path);
  double volume = 0.0, vmin = 1e300;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    volume += mesh.cell_geometry(c).volume;
    vmin = std::min(vmin, mesh.cell_geometry(c).volume);
  }
  std::printf("vertices %d\nedges %d\nfaces %d\ncells %d\nvolume %.17g\nmin_cell_volume %.17g\nh %.17g\n",
              mesh.num_vertices(), mesh.num_edges(), mesh.num_faces(), mesh.num_cells(), volume, vmin,
              mesh.mesh_size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order virtual elements for the 3D Poisson problem"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a study described by a config file");
  std::string config_path, out;
  int jobs = 1;
  bool extreme = false;
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--jobs", jobs, "Concurrent study cells")->check(CLI::PositiveNumber);
  run->add_flag("--allow-extreme-p", extreme, "Allow polynomial degrees up to 10");

  auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "Generate a mesh");
  gen->require_subcommand(1);
  std::string output;
  int n = 2, level = 0;
  auto* cube = gen->add_subcommand("cube", "N x N x N cube mesh of the unit cube");
  cube->add_option("--n", n, "Cells per direction")->required()->check(CLI::PositiveNumber);
  cube->add_option("-o,--output", output, "Output file")->required();
  auto* collapse = gen->add_subcommand("collapse", "Collapsing-octahedron mesh");
  collapse->add_option("--level", level, "Collapse level")->required()->check(CLI::Range(0, 52));
  collapse->add_option("-o,--output", output, "Output file")->required();
  auto* check = mesh->add_subcommand("check", "Validate a mesh file and print a summary");
  std::string check_path;
  check->add_option("file", check_path, "Mesh file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, out, jobs, extreme);
    if (*cube) {
      vem3d::save_mesh(vem3d::build_cube_mesh(n), output);
      return 0;
    }
    if (*collapse) {
      vem3d::save_mesh(vem3d::build_collapsing_mesh(level), output);
      return 0;
    }
    if (*check) return check_command(check_path);
  } catch (const vem3d::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
