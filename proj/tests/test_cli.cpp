#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "twlab/format.hpp"
#include "twlab/pipelines.hpp"

using namespace twlab;

TEST_CASE("complex literals") {
  CHECK(parse_complex("1.5") == Cplx{1.5, 0.0});
  CHECK(parse_complex("-1.2i") == Cplx{0.0, -1.2});
  CHECK(parse_complex("0.8i") == Cplx{0.0, 0.8});
  CHECK(parse_complex("1+2i") == Cplx{1.0, 2.0});
  CHECK(parse_complex("1.5e-2-0.5i") == Cplx{0.015, -0.5});
  CHECK(parse_complex("i") == Cplx{0.0, 1.0});
  CHECK(parse_complex("-i") == Cplx{0.0, -1.0});
  CHECK_THROWS_AS(parse_complex("zebra"), std::invalid_argument);
}

TEST_CASE("shortest round-trip formatting") {
  for (double x : {0.1, 1.0 / 3.0, -1.7725887222397812, 2.0, 1e-300}) {
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
    CHECK(s.size() <= 24);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("minimal periodic config resolves defaults") {
  auto cfg = parse_config("command = verify\nn = 4\n");
  CHECK(cfg.command == Command::Verify);
  CHECK(cfg.chain.n_sites == 4);
  CHECK(cfg.chain.boundary == BoundaryKind::Periodic);
  CHECK(cfg.chain.eta == Cplx{0.0, 1.0});
  CHECK(cfg.chain.homogeneous());
  CHECK(cfg.physical);
  CHECK(cfg.tolerances.at("bae_tol") == 1e-12);
}

TEST_CASE("boundary-field configs") {
  auto cfg = parse_config(
      "command = roots\nn = 4\nboundary = open\n"
      "p = -1.2i\nqbar = 0.8i\nxi = 1\n");
  CHECK(cfg.physical);
  CHECK(std::abs(cfg.chain.open.q - Cplx{0.0, 0.8} * std::sqrt(2.0)) <=
        1e-15);
  CHECK(std::abs(cfg.chain.qbar() - Cplx{0.0, 0.8}) <= 1e-15);

  auto bad = parse_config(
      "command = roots\nn = 4\nboundary = open\n"
      "p = 0.7\nqbar = 0.8i\nxi = 1\n");
  CHECK(!bad.physical);
  CHECK(!bad.warnings.empty());
}

TEST_CASE("config errors carry the key") {
  CHECK_THROWS_WITH_AS(parse_config("command = verify\nwibble = 3\n"),
                       doctest::Contains("wibble"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("command = roots\nn = 5\n"),
                       doctest::Contains("even"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("command = verify\nn = oops\n"),
                       doctest::Contains("integer"), ConfigError);
  CHECK_THROWS_AS(parse_config("command = verify\nn = 4\ntheta = 0.1,0.2\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config("command = verify\nq = 1i\nqbar = 2i\nboundary = open\n"),
      ConfigError);
  CHECK_THROWS_AS(parse_config("command = verify\ntol.zebra = 1\n"),
                  ConfigError);
}

TEST_CASE("verify pipeline passes at N=4") {
  auto cfg = parse_config("command = verify\nn = 4\ntheta = 0.1,-0.2,0.05,0.15\n");
  auto bundle = run(cfg);
  CHECK(bundle.all_checks_pass());
  CHECK(exit_code_for(bundle) == 0);
  CHECK(bundle.tables.count("identities") == 1);
  CHECK(bundle.manifest["command"] == "verify");

  // a hostile tolerance override flips the exit code to a check failure
  auto strict = cfg;
  strict.tolerances["identity_scale"] = 1e-12;
  auto failing = run(strict);
  CHECK(!failing.all_checks_pass());
  CHECK(exit_code_for(failing) == 2);
}

TEST_CASE("roots pipeline emits patterns and records") {
  auto cfg = parse_config("command = roots\nn = 4\n");
  auto bundle = run(cfg);
  CHECK(bundle.all_checks_pass());
  CHECK(bundle.tables.count("root_pattern") == 1);
  CHECK(bundle.records.count("lambda_polynomial") == 1);
  CHECK(bundle.records.count("root_set") == 1);
  const auto& rs = bundle.records.at("root_set");
  CHECK(rs.at("z_centers").size() == 2);
  CHECK(rs.at("tolerances").contains("root_symmetry"));

  // byte-identical reproduction
  auto again = run(cfg);
  CHECK(again.tables.at("root_pattern") == bundle.tables.at("root_pattern"));
  CHECK(again.tables.at("checks") == bundle.tables.at("checks"));
}

TEST_CASE("bae pipeline produces a converged report") {
  auto cfg = parse_config("command = bae\nn = 6\n");
  auto bundle = run(cfg);
  CHECK(bundle.converged);
  CHECK(exit_code_for(bundle) == 0);
  const auto& rep = bundle.records.at("solve_report");
  CHECK(rep.at("converged") == true);
  CHECK(rep.at("tolerances").at("bae_tol") == 1e-12);
}

TEST_CASE("bundle writing") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "twlab_cli_test";
  fs::remove_all(dir);
  auto cfg = parse_config("command = spectrum\nn = 3\n");
  auto bundle = run(cfg);
  write_bundle(bundle, dir.string());
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "levels.csv"));
  CHECK(fs::exists(dir / "checks.csv"));

  std::ifstream in(dir / "levels.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,energy");
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  ResultBundle stuck;
  stuck.converged = false;
  CHECK(exit_code_for(stuck) == 3);

  ResultBundle failing;
  failing.checks.push_back({"synthetic", 1.0, 0.5, false});
  CHECK(exit_code_for(failing) == 2);

  ResultBundle clean;
  clean.checks.push_back({"synthetic", 0.1, 0.5, true});
  CHECK(exit_code_for(clean) == 0);
}

TEST_CASE("figures pipeline emits the pattern tables") {
  auto cfg = parse_config("command = figures\nn = 4\nsweep = 4\n");
  auto bundle = run(cfg);
  CHECK(bundle.tables.count("root_pattern_N4") == 1);
  CHECK(bundle.tables.count("root_pattern_open_N6") == 1);
  for (const auto& check : bundle.checks) {
    INFO(check.name);
    CHECK(check.pass);
  }
}

TEST_CASE("decay pipeline at small sizes") {
  auto cfg = parse_config("command = decay\nn = 4\nsweep = 4,6,8\nu = 1\n");
  auto bundle = run(cfg);
  // monotone decrease holds at these sizes; the slope window is checked in
  // the acceptance sweep
  for (const auto& check : bundle.checks)
    if (check.name.rfind("decay_monotone", 0) == 0) CHECK(check.pass);
  CHECK(bundle.tables.at("decay").find("measured") != std::string::npos);
}
