#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "walkbounds/pipeline.hpp"

using namespace walkbounds;

namespace {

RunConfig bundled(const std::string& name) {
  return load_config(std::string(WALKBOUNDS_CONFIG_DIR) + "/" + name + ".yaml");
}

const Json* row(const Json& report, const std::string& name) {
  for (const auto& r : report.at("bounds").at("rows")) {
    if (r.at("name") == name) return &r;
  }
  return nullptr;
}

std::string strip_timestamp(Json j) {
  j["header"]["timestamp"] = "";
  return j.dump(2);
}

// Numeric table cells and input lines must carry a [tag].
std::vector<std::string> untagged_numbers(const std::string& md) {
  std::vector<std::string> bad;
  std::istringstream in(md);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("- ", 0) == 0 && line.find(" = ") != std::string::npos &&
        line.find('[') == std::string::npos) {
      bad.push_back(line);
    }
    if (line.rfind("| ", 0) != 0) continue;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, '|')) {
      const auto b = cell.find_first_not_of(' ');
      if (b == std::string::npos || cell.find('`') != std::string::npos) continue;
      const char c = cell[b];
      const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+';
      if (numeric && cell.find_first_of("0123456789") != std::string::npos &&
          cell.find('[') == std::string::npos && cell.find("---") == std::string::npos) {
        bad.push_back(line);
      }
    }
  }
  return bad;
}

}  // namespace

TEST_CASE("free_group_d2: all sharp rows are equalities") {
  auto cfg = bundled("free_group_d2");
  RunOverrides ov;
  ov.stages = std::set<std::string>{"bounds", "properties"};
  const auto res = run_pipeline(cfg, ov);
  CHECK(res.exit_code == kExitOk);
  for (const char* name : {"rho_entropy", "drift_entropy", "growth_drift", "growth_entropy",
                           "growth_rho", "fundamental", "chebyshev_combined",
                           "ledrappier_combined"}) {
    const Json* r = row(res.report, name);
    REQUIRE(r != nullptr);
    CHECK(r->at("verdict") == "satisfied-equality");
    CHECK(std::abs(r->at("slack").get<double>()) <= 1e-9);
  }
  CHECK(untagged_numbers(res.bounds_md).empty());
}

TEST_CASE("free_group_d2: boundary, census and exact walk") {
  auto cfg = bundled("free_group_d2");
  cfg.budgets.n_max = 8;
  cfg.budgets.ball_radius = 8;
  cfg.budgets.hitting_samples = 2000;
  cfg.budgets.cocycle_samples = 200;
  cfg.exact.clear();
  RunOverrides ov;
  ov.stages = std::set<std::string>{"census", "exact_walk", "boundary", "bounds", "properties"};
  const auto res = run_pipeline(cfg, ov);
  const auto& rep = res.report;
  CHECK(res.exit_code == kExitOk);
  CHECK(rep.at("errors").empty());
  CHECK(rep.at("boundary").at("h").get<double>() == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
  CHECK(rep.at("boundary").at("detector_exact").at("two_valued") == true);
  CHECK(rep.at("census").at("sphere_sizes")[3] == 36);
  // h, ell and rho come from the boundary solver, v from the census
  CHECK(rep.at("bounds").at("sources").at("h") == "boundary");
  CHECK(rep.at("bounds").at("sources").at("v") == "census");
  CHECK(row(rep, "rho_entropy")->at("verdict") == "satisfied-equality");
  for (const auto& [name, p] : rep.at("properties").items()) {
    CHECK_MESSAGE(p.at("status") != "fail", name);
  }
  CHECK(res.series_csv.find('\n') != std::string::npos);
}

TEST_CASE("surface_growth: constants-only tables") {
  const auto res = run_pipeline(bundled("surface_growth"));
  CHECK(res.exit_code == kExitOk);
  const auto& b = res.report.at("bounds");
  CHECK(b.at("growth_bounds").at("ell_max").get<double>() == doctest::Approx(0.749368278).epsilon(1e-9));
  CHECK(b.at("growth_bounds").at("h_max").get<double>() == doctest::Approx(1.456041598).epsilon(1e-9));
  CHECK(b.at("growth_bounds").at("rho_min").get<double>() == doctest::Approx(0.66215344).epsilon(1e-8));
  CHECK(b.at("growth_bounds").at("provenance") == "external");
  CHECK(b.at("implied_bounds").at("h_min").get<double>() == doctest::Approx(1.452903618).epsilon(1e-9));
  CHECK(b.at("implied_bounds").at("ell_min").get<double>() == doctest::Approx(0.747753281).epsilon(1e-9));
  CHECK(res.bounds_md.find("0.749368278") != std::string::npos);
  CHECK(res.bounds_md.find("[external: ") != std::string::npos);
  CHECK(untagged_numbers(res.bounds_md).empty());
}

TEST_CASE("z_asymmetric_p03: rows skipped, drift 0.4") {
  auto cfg = bundled("z_asymmetric_p03");
  cfg.budgets.mc_paths = 1000;
  const auto res = run_pipeline(cfg);
  CHECK(res.exit_code == kExitOk);
  const auto& mc = res.report.at("monte_carlo");
  // exact law: |S_400| / 400 has mean 0.4 and sd sqrt(4 * 0.21 / 400) / sqrt(1000)
  CHECK(std::abs(mc.at("drift").get<double>() - 0.4) < 4 * std::sqrt(0.84 / 400 / 1000) + 1e-9);
  for (const char* name : {"rho_entropy", "drift_entropy", "growth_drift"}) {
    CHECK(row(res.report, name)->at("verdict") == "skipped");
  }
  CHECK(row(res.report, "growth_drift")->at("reason") == "asymmetric measure");
  CHECK(!res.report.at("bounds").contains("growth_bounds"));
}

TEST_CASE("same config and seed give the same report") {
  auto cfg = bundled("modular_p13");
  cfg.budgets.n_max = 6;
  cfg.budgets.mc_paths = 300;
  cfg.budgets.mc_steps = 100;
  cfg.budgets.hitting_samples = 300;
  cfg.budgets.cocycle_samples = 100;
  RunOverrides ov;
  ov.stages = std::set<std::string>{"exact_walk", "monte_carlo", "boundary", "bounds"};
  const auto a = run_pipeline(cfg, ov);
  const auto b = run_pipeline(cfg, ov);
  CHECK(strip_timestamp(a.report) == strip_timestamp(b.report));
  CHECK(a.series_csv == b.series_csv);
  CHECK(a.bounds_md == b.bounds_md);
  ov.seed = 99;
  const auto c = run_pipeline(cfg, ov);
  CHECK(c.report.at("monte_carlo").at("drift") != a.report.at("monte_carlo").at("drift"));
}

TEST_CASE("budget exhaustion names the stage and depth") {
  auto cfg = bundled("free_group_d2");
  RunOverrides ov;
  ov.stages = std::set<std::string>{"exact_walk"};
  ov.memory_bytes = 100000;
  const auto res = run_pipeline(cfg, ov);
  CHECK(res.exit_code == kExitStageError);
  REQUIRE(res.report.at("errors").size() == 1);
  CHECK(res.report.at("errors")[0].at("stage") == "exact_walk");
  CHECK(res.report.at("errors")[0].at("reached").get<long>() > 0);
}

TEST_CASE("violated row gives exit 1") {
  auto cfg = bundled("free_group_d2");
  cfg.exact["h"].value = 0.4;  // below F(sqrt(1 - rho^2))
  RunOverrides ov;
  ov.stages = std::set<std::string>{"bounds"};
  const auto res = run_pipeline(cfg, ov);
  CHECK(row(res.report, "rho_entropy")->at("verdict") == "violated");
  CHECK(res.exit_code == kExitViolated);
}

TEST_CASE("invalid config gives exit 3 without running") {
  auto cfg = bundled("free_group_d2");
  cfg.seed.reset();
  const auto res = run_pipeline(cfg);
  CHECK(res.exit_code == kExitConfig);
  CHECK(!res.report.contains("bounds"));
}

TEST_CASE("bundle round trip") {
  auto cfg = bundled("surface_growth");
  const auto res = run_pipeline(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "walkbounds_bundle_test";
  std::filesystem::remove_all(dir);
  write_bundle(res, dir.string());
  std::filesystem::remove(dir / "bounds.md");
  CHECK(rerender_bundle(dir.string()) == kExitOk);
  std::ifstream f(dir / "bounds.md");
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == res.bounds_md);
  std::filesystem::remove_all(dir);
}

TEST_CASE("every bundled config validates") {
  for (const auto& e : std::filesystem::directory_iterator(WALKBOUNDS_CONFIG_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    const auto cfg = load_config(e.path().string());
    for (const auto& d : validate_config(cfg)) {
      const std::string msg = e.path().filename().string() + ": " + d.message;
      CHECK_MESSAGE(d.severity != "error", msg);
    }
  }
}
