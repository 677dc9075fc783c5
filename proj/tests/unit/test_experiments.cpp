#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ipva/error.hpp"
#include "ipva/experiments.hpp"

using namespace ipva;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing and typed access") {
  const KeyValueConfig c = KeyValueConfig::parse(
      "# comment\nseeds = 2:4\nN = 7\nalpha2 = 0.5\nwarm_start = false\nN = 9\n");
  CHECK(c.get_int("N", 0) == 9);
  CHECK(c.get_double("alpha2", 0.0) == 0.5);
  CHECK_FALSE(c.get_bool("warm_start", true));
  CHECK(seeds_from_config(c, {}) == std::vector<std::uint64_t>{2, 3, 4});
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign"), Error);
  CHECK_THROWS_AS(KeyValueConfig::parse("N = x").get_int("N", 0), Error);
}

TEST_CASE("config hash ignores output location and worker count") {
  KeyValueConfig a = KeyValueConfig::parse("experiment = simulate\nseeds = 1\n");
  KeyValueConfig b = a;
  b.set("out", "/tmp/elsewhere");
  b.set("workers", "4");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.set("seeds", "2");
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("experiment specs are validated") {
  CHECK_THROWS_AS(ExperimentSpec::from_config(KeyValueConfig::parse("out = x\n")), Error);
  CHECK_THROWS_AS(
      ExperimentSpec::from_config(KeyValueConfig::parse("experiment = nope\nout = x\n")),
      Error);
  const auto dir = fs::temp_directory_path() / "ipva_unit_badkey";
  KeyValueConfig c = KeyValueConfig::parse("experiment = simulate\nduration = 2\nbogus = 1\n");
  c.set("out", dir.string());
  try {
    run_experiment(ExperimentSpec::from_config(c));
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.is_config_error());
  }
  fs::remove_all(dir);
}

TEST_CASE("reruns of a spec write identical files") {
  const auto root = fs::temp_directory_path() / "ipva_unit_rerun";
  fs::remove_all(root);
  std::vector<ExperimentReport> reps;
  for (int i = 0; i < 2; ++i) {
    KeyValueConfig c = KeyValueConfig::parse("experiment = simulate\nseeds = 5\nduration = 3\n");
    c.set("out", (root / std::to_string(i)).string());
    reps.push_back(run_experiment(ExperimentSpec::from_config(c)));
  }
  CHECK(reps[0].hash == reps[1].hash);
  CHECK(reps[0].files.size() == reps[1].files.size());
  for (const auto& entry : fs::directory_iterator(root / "0")) {
    const auto name = entry.path().filename();
    if (name == "manifest.txt") continue;
    CHECK(slurp(entry.path()) == slurp(root / "1" / name));
  }
  // The manifest reloads as a config with the same hash.
  CHECK(config_hash(KeyValueConfig::load(reps[0].manifest_path)) == reps[0].hash);
  fs::remove_all(root);
}

TEST_CASE("block means average consecutive runs") {
  std::vector<RunRecord> rows(4);
  for (int i = 0; i < 4; ++i) {
    rows[i].avg_power = i;
    rows[i].rms_accel = 10 + i;
  }
  const std::vector<Metrics> m = block_means(rows, 2);
  REQUIRE(m.size() == 2);
  CHECK(m[0].avg_power == 0.5);
  CHECK(m[1].rms_accel == 12.5);
  CHECK(preview_noise_seed(1) != preview_noise_seed(2));
}
