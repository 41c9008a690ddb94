#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PULSEJET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pulsejet_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate writes a trajectory, a ledger and the effective config") {
  const fs::path out = scratch("simulate");
  CHECK(run("simulate --evr 75 --glide 1.10 --cycles 1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "trajectory.csv"));
  CHECK(fs::exists(out / "ledger.txt"));
  CHECK(fs::exists(out / "effective.cfg"));
  // 2.2 s at 1 ms plus the header and the t = 0 row.
  const std::string csv = slurp(out / "trajectory.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2202);
}

TEST_CASE("sweep over the default GPF grid gives four rows and is byte-identical on rerun") {
  const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
  CHECK(run("sweep --var gpf --grid 0,25,50,75 --config " PULSEJET_DEFAULT_CONFIG " --out " + a.string()) == 0);
  CHECK(run("sweep --var gpf --grid 0,25,50,75 --jobs 2 --config " PULSEJET_DEFAULT_CONFIG " --out " + b.string()) == 0);
  const std::string csv = slurp(a / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv == slurp(b / "sweep.csv"));
}

TEST_CASE("effective config reruns to the same outputs") {
  const fs::path a = scratch("echo_a"), b = scratch("echo_b");
  CHECK(run("simulate --gpf 25 --no-valves --out " + a.string()) == 0);
  CHECK(run("simulate --config " + (a / "effective.cfg").string() + " --out " + b.string()) == 0);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "effective.cfg") == slurp(b / "effective.cfg"));
}

TEST_CASE("analyze and compare a trace") {
  const fs::path out = scratch("analyze");
  fs::create_directories(out);
  {
    std::ofstream f(out / "trace.csv");
    f << "t,x\n0,0\n1,0.2\n2,0.4\n3,0.6\n";
  }
  CHECK(run("analyze " + (out / "trace.csv").string() + " --distance 0.5 --out " + out.string()) == 0);
  CHECK(slurp(out / "report.txt").find("avg_speed_mps=0.2\n") != std::string::npos);
  CHECK(run("compare " + (out / "trace.csv").string() + " " + (out / "trace.csv").string() + " --out " + out.string()) == 0);
  CHECK(slurp(out / "comparison.txt").find("rmse_x_m=0\n") != std::string::npos);
  CHECK(run("analyze " + (out / "trace.csv").string() + " --distance 5 --out " + out.string()) == 1);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("codes");
  CHECK(run("") == 1);
  CHECK(run("launch") == 1);
  CHECK(run("simulate --bogus") == 1);
  CHECK(run("simulate --evr 95 --out " + out.string()) == 1);
  CHECK(run("simulate --config /nonexistent/run.cfg") == 2);
  CHECK(run("analyze /nonexistent/trace.csv") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("fall identification table") {
  const fs::path out = scratch("fall");
  CHECK(run("fall --out " + out.string()) == 0);
  const std::string csv = slurp(out / "fall.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
