#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace vem3d;
using namespace vem3d::testing;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vem3d_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesFullGrammar) {
  const ExperimentConfig cfg = parse(
      "# comment line\n"
      "study = \"h_study\"\n"
      "meshes = [\"cube:2\", \"cube:4\"]  # trailing comment\n"
      "p = 1..3\n"
      "choices = [standard, \"hybrid\"]\n"
      "stabs = [\"S1\", \"S2\"]\n"
      "solution = \"u1\"\n"
      "out = \"results/h\"\n"
      "condition = false\n"
      "record_timing = false\n");
  EXPECT_EQ(cfg.study, "h_study");
  EXPECT_EQ(cfg.meshes, (std::vector<std::string>{"cube:2", "cube:4"}));
  EXPECT_EQ(cfg.degrees, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(cfg.choices, (std::vector<BasisChoice>{BasisChoice::standard, BasisChoice::hybrid}));
  EXPECT_EQ(cfg.stabs, (std::vector<Stabilization>{Stabilization::S1, Stabilization::S2}));
  EXPECT_EQ(cfg.out, "results/h");
  EXPECT_FALSE(cfg.condition);
  EXPECT_FALSE(cfg.record_timing);
}

TEST(Config, PatchDefaultsToLinearSolution) {
  const ExperimentConfig cfg = parse("study = patch\nmeshes = [cube:2]\np = [1, 2]\n");
  EXPECT_EQ(cfg.solution, "u2");
  EXPECT_EQ(cfg.degrees, (std::vector<int>{1, 2}));
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("study = patch\nmeshes [cube:2]\n"), 2);
  EXPECT_EQ(line_of("study = patch\n\nmeshes = [cube:2]\np = [1, x]\n"), 4);
  EXPECT_EQ(line_of("study = bogus\n"), 1);
  EXPECT_EQ(line_of("meshes = [cube:2]\np = 1\nchoices = [legendre]\n"), 3);
  EXPECT_EQ(line_of("meshes = [cube:2]\np = 1\nwhatever = 3\n"), 3);
  EXPECT_EQ(line_of("meshes = [cube:2]\nmeshes = [cube:3]\n"), 2);
  EXPECT_EQ(line_of("meshes = [\"cube:2\"\np = 1\n"), 1);
  EXPECT_EQ(line_of("meshes = [cube:2]\nsolution = u7\np = 1\n"), 2);
  EXPECT_GT(line_of("meshes = [cube:2]\n"), 0);
}

TEST(Config, DegreeGuard) {
  ExperimentConfig cfg = parse("meshes = [cube:1]\np = [2, 7]\n");
  EXPECT_THROW(validate_degrees(cfg, false), InvalidArgument);
  EXPECT_NO_THROW(validate_degrees(cfg, true));
  cfg.degrees = {11};
  EXPECT_THROW(validate_degrees(cfg, true), InvalidArgument);
  cfg.degrees = {0};
  EXPECT_THROW(validate_degrees(cfg, true), InvalidArgument);
  EXPECT_THROW(run_experiment(parse("meshes = [cube:1]\np = 7\n")), InvalidArgument);
}

TEST(Config, MeshSpecs) {
  EXPECT_EQ(make_mesh("cube:2").num_cells(), 8);
  EXPECT_EQ(make_mesh("collapse:1").num_cells(), 5);
  EXPECT_THROW(make_mesh("sphere:3"), InvalidArgument);
  EXPECT_THROW(make_mesh("cube"), InvalidArgument);
  const fs::path dir = scratch_dir("meshspec");
  save_mesh(build_cube_mesh(1), (dir / "one.mesh").string());
  EXPECT_EQ(make_mesh("file:one.mesh", dir).num_cells(), 1);
  fs::remove_all(dir);
}

TEST(Run, PatchStudyIsExact) {
  ExperimentConfig cfg = parse(
      "study = patch\nmeshes = [cube:2]\np = 1..3\nchoices = [standard, orthogonal, hybrid]\nstabs = [S2]\n"
      "record_timing = false\n");
  const ExperimentReport rep = run_experiment(cfg);
  ASSERT_EQ(rep.rows.size(), 9u);
  EXPECT_TRUE(rep.all_ok());
  for (const auto& r : rep.rows) {
    EXPECT_LE(r.h1_rel, 1e-9);
    EXPECT_LE(r.l2_rel, 1e-9);
    EXPECT_GE(r.kappa, 1.0);
    EXPECT_EQ(r.seconds, 0.0);
    EXPECT_GT(r.ndof, 0);
  }
}

TEST(Run, FailingMeshIsIsolated) {
  const fs::path dir = scratch_dir("isolation");
  {
    std::ofstream bad(dir / "bad.mesh");
    bad << "vem3d-mesh 1\nvertices 2\n0 0 0\n";
  }
  ExperimentConfig cfg = parse("study = patch\nmeshes = [file:bad.mesh, cube:1]\np = 2\nrecord_timing = false\n");
  cfg.base_dir = dir;
  const ExperimentReport rep = run_experiment(cfg);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_NE(rep.rows[0].status, "ok");
  EXPECT_EQ(rep.rows[1].status, "ok");
  EXPECT_FALSE(rep.all_ok());
  fs::remove_all(dir);
}

TEST(Run, DeterministicCsvAndOutputs) {
  const fs::path dir = scratch_dir("determinism");
  const std::string text =
      "study = h_study\nmeshes = [cube:1, cube:2]\np = [1, 2]\nchoices = [orthogonal]\nstabs = [S1, S2]\n"
      "solution = u1\nrecord_timing = false\nout = run\n";
  std::string first, second;
  for (int k = 0; k < 2; ++k) {
    ExperimentConfig cfg = parse(text);
    cfg.base_dir = dir;
    RunOptions opts;
    opts.jobs = k == 0 ? 1 : 3;
    const ExperimentReport rep = run_experiment(cfg, opts);
    write_outputs(rep);
    (k == 0 ? first : second) = read_file(dir / "run" / "report.csv");
  }
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.substr(0, first.find('\n')), kReportHeader);
  EXPECT_TRUE(fs::exists(dir / "run" / "rates.csv"));
  EXPECT_TRUE(fs::exists(dir / "run" / "h_study_h1.svg"));
  EXPECT_TRUE(fs::exists(dir / "run" / "h_study_l2.svg"));
  const std::string svg = read_file(dir / "run" / "h_study_h1.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  const std::string rates = read_file(dir / "run" / "rates.csv");
  EXPECT_EQ(rates.substr(0, rates.find('\n')), "p,choice,stab,mesh_coarse,mesh_fine,h1_rate,l2_rate");
  fs::remove_all(dir);
}

TEST(Report, CsvFieldsAreLossless) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
  ExperimentReport rep;
  ReportRow row;
  row.mesh = "file:a,b.mesh";
  row.h = 0.5;
  row.p = 2;
  row.h1_rel = 1.0 / 3.0;
  row.l2_rel = 2.0 / 7.0;
  row.kappa = 12.5;
  row.ndof = 27;
  rep.rows.push_back(row);
  std::ostringstream out;
  write_report_csv(rep, out);
  const std::string csv = out.str();
  EXPECT_NE(csv.find("\"file:a,b.mesh\""), std::string::npos);
  EXPECT_NE(csv.find(format_double(1.0 / 3.0)), std::string::npos);
  EXPECT_NE(csv.find(",ok"), std::string::npos);
}
