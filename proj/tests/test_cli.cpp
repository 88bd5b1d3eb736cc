#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

#ifndef QFC_BINARY
#error "QFC_BINARY must point at the CLI executable"
#endif

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  fs::path tmp = fs::temp_directory_path() / "qfc_cli_stdout.txt";
  std::string cmd = std::string(QFC_BINARY) + " " + args + " > " + tmp.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

fs::path write_config(const std::string& name, const Json& j) {
  fs::path dir = fs::temp_directory_path() / "qfc_cli_cfg";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

Json base_config() {
  Json j;
  j["grid"]["n_points"] = 12;
  j["grid"]["circumference"] = 6.283185307179586;
  j["profile"]["name"] = "flat";
  j["profile"]["params"] = Json::object();
  j["mass"] = 1.0;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("list-experiments names every command, stably") {
  RunResult r1 = run("list-experiments");
  CHECK(r1.code == 0);
  for (const char* name : {"validate-state", "thermal-sweep", "propagators", "riccati",
                           "calderon", "scatter", "conformal"})
    CHECK(r1.out.find(name) != std::string::npos);
  RunResult r2 = run("list-experiments");
  CHECK(r1.out == r2.out);
}

TEST_CASE("validate-state on the flat profile: exit 0 and tiny ccr defect") {
  fs::path cfg = write_config("vac.json", base_config());
  fs::path out = fs::temp_directory_path() / "qfc_cli_vac";
  RunResult r = run("validate-state --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  Json rep = Json::parse(slurp(out / "report.json"));
  CHECK(rep["passed"].get<bool>());
  CHECK(rep["results"]["state"]["defects"]["ccr"].get<double>() <= 1e-12);
  CHECK(rep["results"]["purity_defect"].get<double>() <= 1e-9);
}

TEST_CASE("calderon with beta = ln 3 reports the restriction distance") {
  Json j = base_config();
  j["beta"] = 1.0986122886681098;
  fs::path cfg = write_config("cal.json", j);
  fs::path out = fs::temp_directory_path() / "qfc_cli_cal";
  RunResult r = run("calderon --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  Json rep = Json::parse(slurp(out / "report.json"));
  CHECK(rep["results"]["restriction_vs_thermal"].get<double>() <= 1e-9);
  CHECK(fs::exists(out / "dirichlet_ladder.csv"));
}

TEST_CASE("malformed configs exit 2 with diagnostics") {
  RunResult missing = run("validate-state --config /nonexistent.json --out /tmp/qfc_none");
  CHECK(missing.code == 2);

  Json j = base_config();
  j["profile"]["name"] = "no-such-profile";
  fs::path cfg = write_config("bad_profile.json", j);
  RunResult bad = run("validate-state --config " + cfg.string() + " --out /tmp/qfc_none");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("profile") != std::string::npos);

  Json j2 = base_config();
  j2["experiment"] = "calderon";
  fs::path cfg2 = write_config("wrong_exp.json", j2);
  RunResult wrong = run("validate-state --config " + cfg2.string() + " --out /tmp/qfc_none");
  CHECK(wrong.code == 2);

  Json j3 = base_config();
  j3["mass"] = -1.0;
  fs::path cfg3 = write_config("bad_mass.json", j3);
  CHECK(run("validate-state --config " + cfg3.string() + " --out /tmp/qfc_none").code == 2);
}

TEST_CASE("numerical failure exits 1 naming the invariant") {
  Json j = base_config();
  j["tolerances"]["purity"] = 1e-30;  // unattainable
  fs::path cfg = write_config("strict.json", j);
  fs::path out = fs::temp_directory_path() / "qfc_cli_strict";
  RunResult r = run("validate-state --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("purity") != std::string::npos);
  Json rep = Json::parse(slurp(out / "report.json"));
  CHECK_FALSE(rep["passed"].get<bool>());
  CHECK(rep["failed_invariant"].get<std::string>().find("purity") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs and thread budgets") {
  Json j = base_config();
  j["betas"] = {0.5, 1.0, 2.0};
  fs::path cfg = write_config("sweep.json", j);
  fs::path out1 = fs::temp_directory_path() / "qfc_cli_s1";
  fs::path out2 = fs::temp_directory_path() / "qfc_cli_s2";
  CHECK(run("thermal-sweep --config " + cfg.string() + " --out " + out1.string()).code == 0);
  int raw = std::system(("QFC_THREADS=4 " + std::string(QFC_BINARY) + " thermal-sweep --config " +
                         cfg.string() + " --out " + out2.string() + " > /dev/null 2>&1")
                            .c_str());
  CHECK(WEXITSTATUS(raw) == 0);
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  CHECK(slurp(out1 / "thermal_sweep.csv") == slurp(out2 / "thermal_sweep.csv"));
}
