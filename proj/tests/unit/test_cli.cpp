#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <sstream>
#include <vector>

#include "savmhd/app.hpp"
#include "savmhd/diagnostics.hpp"

using namespace savmhd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("savmhd_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "savmhd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}) == app::kSuccess);
  CHECK(cli({}) == app::kOperationalFailure);
  CHECK(cli({"bogus"}) == app::kOperationalFailure);
  CHECK(cli({"accuracy", "--tau", "0.3"}) == app::kOperationalFailure);
  CHECK(cli({"accuracy", "--order", "3"}) == app::kOperationalFailure);
  CHECK(cli({"accuracy", "--mesh-n", "0"}) == app::kOperationalFailure);
}

TEST_CASE("validate") {
  app::RunSpec s;
  s.subcommand = "accuracy";
  s.taus = {0.25, 0.125};
  CHECK_NOTHROW(app::validate(s, 1.0));
  s.taus = {0.3};
  CHECK_THROWS_AS(app::validate(s, 1.0), std::invalid_argument);
}

TEST_CASE("single tau accuracy table has empty rate cells") {
  const fs::path dir = scratch_dir("acc1");
  CHECK(cli({"accuracy", "--tau", "0.2", "--mesh-n", "3", "--out", dir.string()}) == app::kSuccess);
  const CsvTable t = read_csv((dir / "accuracy_order1.csv").string());
  REQUIRE(t.rows.size() == 1);
  for (std::size_t c = 2; c < t.header.size(); c += 2) CHECK(t.rows[0][c].empty());
}

TEST_CASE("accuracy tables for both orders") {
  const fs::path dir = scratch_dir("acc2");
  CHECK(cli({"accuracy", "--order", "1", "--order", "2", "--tau", "0.1", "--tau", "0.05", "--out",
             dir.string()}) == app::kSuccess);
  const CsvTable t1 = read_csv((dir / "accuracy_order1.csv").string());
  const CsvTable t2 = read_csv((dir / "accuracy_order2.csv").string());
  CHECK(std::stod(t1.rows[1][2]) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::stod(t2.rows[1][2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("stability on a coarse mesh") {
  const fs::path dir = scratch_dir("stab");
  CHECK(cli({"stability", "--order", "1", "--mesh-n", "6", "--re", "20", "--tau", "0.5", "--tau", "0.1",
             "--t-final", "1", "--out", dir.string()}) == app::kSuccess);
  CHECK(fs::exists(dir / "energy_1_20.csv"));
  CHECK(fs::exists(dir / "energy_1_20.gp"));
  const CsvTable t = read_csv((dir / "energy_1_20.csv").string());
  CHECK(t.rows.size() == (2 + 1) + (10 + 1));
}

TEST_CASE("cavity on a coarse mesh") {
  const fs::path dir = scratch_dir("cav");
  CHECK(cli({"cavity2d", "--mesh-n", "6", "--tau", "0.05", "--t-final", "1", "--out", dir.string()}) ==
        app::kSuccess);
  for (const char* f : {"cavity_velocity_t0.1.csv", "cavity_velocity_t1.csv", "cavity_history.csv",
                        "cavity_centerline.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(read_csv((dir / "cavity_centerline.csv").string()).rows.size() == 101);
}

TEST_CASE("selftest exit codes") {
  CHECK(cli({"selftest"}) == app::kSuccess);
  std::string text;
  CHECK(cli({"selftest", "--inject", "flip-lorentz-sign"}, &text) == app::kInvariantViolation);
  CHECK(text.find("FAIL") != std::string::npos);
  CHECK(cli({"selftest", "--inject", "naive-bdf2-coefficient"}) == app::kInvariantViolation);
  CHECK(cli({"selftest", "--inject", "nonsense"}) == app::kOperationalFailure);
}

}
