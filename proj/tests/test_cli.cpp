#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CROWDTEACH_CLI_PATH;
const std::string kWineCsv = std::string(CROWDTEACH_DATA_DIR) + "/winequality-red.csv";

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("crowdteach_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliResult {
  int exit_code;
  std::string stderr_text;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = kCli + " " + args + " 2>" + err.string() + " >/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::ostringstream ss;
  ss << in.rdbuf();
  return CliResult{WEXITSTATUS(status), ss.str()};
}

std::string tiny_flags(const fs::path& out) {
  return "--dataset insect --n-per-class 30 --lambda 1 --seeds 0 --iterations 3 "
         "--exam-size 5 --students-per-group 3 --out " + out.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run exits 0 and writes the output tree") {
  const fs::path out = fresh_dir("run");
  const CliResult r = run_cli("run " + tiny_flags(out), out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "rmse.csv"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("config file values are overridden by flags") {
  const fs::path out = fresh_dir("cfg");
  const fs::path cfg = out / "exp.cfg";
  {
    std::ofstream f(cfg);
    f << "dataset = insect\nn_per_class = 30\nlambdas = 1\nseeds = 0\n"
      << "iterations = 2\nexam_size = 5\nstudents_per_group = 3\n"
      << "out_dir = " << out.string() << "\n";
  }
  const CliResult r =
      run_cli("run --config " + cfg.string() + " --iterations 3", out);
  CHECK(r.exit_code == 0);
  std::ifstream in(out / "manifest.json");
  const json manifest = json::parse(in);
  CHECK(manifest.at("config").at("iterations") == 3);
}

TEST_CASE("invalid configuration exits 1 naming the field") {
  const fs::path out = fresh_dir("badcfg");
  const CliResult r = run_cli("run --dataset marble --out " + out.string(), out);
  CHECK(r.exit_code == 1);
  CHECK(r.stderr_text.find("dataset") != std::string::npos);

  const CliResult r2 =
      run_cli("run --dataset insect --iterations -5 --out " + out.string(), out);
  CHECK(r2.exit_code == 1);
  CHECK(r2.stderr_text.find("iterations") != std::string::npos);
}

TEST_CASE("a missing wine file exits 2") {
  const fs::path out = fresh_dir("nowine");
  const CliResult r = run_cli(
      "run --dataset wine --wine-path /no/such/wine.csv --lambda 1 --seeds 0 "
      "--iterations 1 --students-per-group 3 --out " + out.string(), out);
  CHECK(r.exit_code == 2);
}

TEST_CASE("sweep-b requires --values") {
  const fs::path out = fresh_dir("sweepbv");
  const CliResult r = run_cli("sweep-b " + tiny_flags(out), out);
  CHECK(r.exit_code == 1);
}

TEST_CASE("sweep-b writes one trajectory per interval") {
  const fs::path out = fresh_dir("sweepb");
  const CliResult r =
      run_cli("sweep-b --values 1,2 --policy teacherless " + tiny_flags(out), out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "trajectory_B1.csv"));
  CHECK(fs::exists(out / "trajectory_B2.csv"));
}

TEST_CASE("sweep-t rejects oversized exams") {
  const fs::path out = fresh_dir("sweept");
  const CliResult r =
      run_cli("sweep-t --values 99999 --policy teacherless " + tiny_flags(out), out);
  CHECK(r.exit_code == 1);
  CHECK(r.stderr_text.find("exam_size") != std::string::npos);
}

TEST_CASE("dump-dataset writes the prepared CSV") {
  const fs::path out = fresh_dir("dump");
  const fs::path csv = out / "ds.csv";
  const CliResult r = run_cli(
      "dump-dataset --dataset insect --n-per-class 10 --seed 1 --file " + csv.string() +
          " --out " + out.string(), out);
  CHECK(r.exit_code == 0);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "f0,f1,y");
}

TEST_CASE("the real wine pipeline runs end to end") {
  const fs::path out = fresh_dir("wine");
  const CliResult r = run_cli(
      "run --dataset wine --wine-path " + kWineCsv +
          " --lambda 1 --seeds 0 --iterations 2 --exam-size 10 "
          "--students-per-group 3 --policy random,teacherless --out " + out.string(), out);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
}

}  // TEST_SUITE
