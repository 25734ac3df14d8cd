#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace {

const std::filesystem::path kTmp = std::filesystem::temp_directory_path() / "stencilguard_cli";

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stdout is captured, stderr dropped.
Result cli(const std::string& args, const std::string& env = "") {
  std::filesystem::create_directories(kTmp);
  const auto out_file = kTmp / "stdout.txt";
  const std::string cmd = env + " \"" STENCILGUARD_CLI "\" " + args + " >\"" + out_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

const std::string kSmall = "--tile 16x16x4 --iters 32";

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("campaign " + kSmall).code == 1);  // --out missing
  CHECK(cli("run --mode sometimes").code == 1);
  CHECK(cli("run --delta 0 --mode offline").code == 1);
  CHECK(cli("run --tile 4x").code == 1);
  CHECK(cli("run --bogus-flag").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("run prints a JSON result and is reproducible") {
  const auto a = cli("run " + kSmall + " --seed 5 --rep 2");
  const auto b = cli("run " + kSmall + " --seed 5 --rep 2");
  REQUIRE(a.code == 0);
  const auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
  CHECK(ja["l2_error"] == jb["l2_error"]);
  CHECK(ja["fault"] == jb["fault"]);
  CHECK(ja["mode"] == "online");
}

TEST_CASE("offline run rolls back at most once") {
  for (int rep = 0; rep < 4; ++rep) {
    const auto r = cli("run " + kSmall + " --mode offline --delta 8 --bit-range 25-31 --rep " + std::to_string(rep));
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rollbacks"].get<int>() <= 1);
  }
}

TEST_CASE("persistent mismatch exits 3") {
  // 128 chained binary32 interpolations exceed the default threshold here.
  CHECK(cli("run --mode offline --delta 128 --fault none").code == 3);
}

TEST_CASE("config file and environment precedence") {
  std::filesystem::create_directories(kTmp);
  const auto cfg = kTmp / "c.toml";
  std::ofstream(cfg) << "tile = \"16x16x2\"\niterations = 16\nmode = \"offline\"\ndelta = 4\nthreads = 3\nfault = \"none\"\n";
  const auto from_file = cli("run --config " + cfg.string());
  REQUIRE(from_file.code == 0);
  CHECK(nlohmann::json::parse(from_file.out)["detection_points"] == 4);
  const auto flag_wins = cli("run --config " + cfg.string() + " --delta 8");
  CHECK(nlohmann::json::parse(flag_wins.out)["detection_points"] == 2);
  CHECK(cli("run --config " + cfg.string(), "STENCILGUARD_THREADS=0").code == 1);
  CHECK(cli("run --config " + cfg.string() + " --threads 2", "STENCILGUARD_THREADS=0").code == 0);
  std::ofstream(kTmp / "bad.toml") << "nonsense = 1\n";
  CHECK(cli("run --config " + (kTmp / "bad.toml").string()).code == 1);
}

TEST_CASE("campaign writes results.csv and summary.json") {
  const auto dir = kTmp / "campaign";
  std::filesystem::remove_all(dir);
  REQUIRE(cli("campaign " + kSmall + " --reps 5 --out " + dir.string()).code == 0);
  CHECK(count_lines(dir / "results.csv") == 6);
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["aggregates"]["runs"] == 5);
}

TEST_CASE("bitsweep and periodsweep row counts") {
  const auto bits = kTmp / "bits";
  std::filesystem::remove_all(bits);
  REQUIRE(cli("bitsweep " + kSmall + " --reps 1 --out " + bits.string()).code == 0);
  CHECK(count_lines(bits / "bitsweep.csv") == 33);

  const auto per = kTmp / "period";
  std::filesystem::remove_all(per);
  REQUIRE(cli("periodsweep " + kSmall + " --reps 2 --deltas 1,4,8,16 --out " + per.string()).code == 0);
  CHECK(count_lines(per / "periodsweep.csv") == 9);
}

TEST_CASE("overhead writes both ratios") {
  const auto dir = kTmp / "overhead";
  std::filesystem::remove_all(dir);
  REQUIRE(cli("overhead " + kSmall + " --reps 2 --out " + dir.string()).code == 0);
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["measured_ratio"].get<double>() > 0);
  CHECK(j["reported_ratio"].get<double>() == 1.08);
}
