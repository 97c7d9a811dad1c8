/*
 * Copyright (c) 2026, The htrm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <fmt/format.h>

#include "htrm/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = 0;
  std::string out;
};

// Runs the CLI inside the scratch directory, capturing stdout.
Result run(const std::string& args) {
  fs::create_directories(HTRM_TEST_WORKDIR);
  const std::string cmd =
      fmt::format("cd '{}' && '{}' {} 2>/dev/null", HTRM_TEST_WORKDIR, HTRM_CLI_PATH, args);
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path work(const std::string& name) { return fs::path(HTRM_TEST_WORKDIR) / name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("limits: Frechet CDF grid") {
  const Result r = run("limits --law frechet --mu 1 --c 2 --grid 0.5:5:0.1");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("x,cdf") == 0);
  CHECK(r.out.find("1.000000,0.367879") != std::string::npos);
}

TEST_CASE("limits: F_alpha, tau_alpha and G_MP values") {
  CHECK(run("limits --falpha --alpha 1 --x 2").out == "2.25\n");
  CHECK(run("limits --tau --alpha 1").out == "0.7071067812\n");
  CHECK(run("limits --stieltjes --alpha 1 --x 4").out == "0.5\n");
  CHECK(run("limits --law lambda --c 2 --mu 1 --x 2").out.find("2.000000,0.367879") != std::string::npos);
}

TEST_CASE("limits: bad input exits with a domain error") {
  CHECK(run("limits --law frechet --mu 3 --c 2 --x 1").status == 1);
  CHECK(run("limits --law gumbel --x 1").status == 1);
  CHECK(run("nonsense").status == 1);
}

TEST_CASE("experiment: a missing config fails and writes nothing") {
  fs::remove_all(work("missing_out"));
  const Result r = run("experiment does_not_exist.ini --out-dir missing_out");
  CHECK(r.status == 1);
  CHECK_FALSE(fs::exists(work("missing_out") / "run.manifest.json"));
}

TEST_CASE("experiment then report") {
  {
    std::ofstream cfg(work("pp.ini"));
    cfg << "[experiment]\nkind = point_process\ntrials = 6\nseed = 3\n\n"
           "[ensemble]\nn = 150\n\n[point_process]\nthresholds = 1\n\n"
           "[output]\ndir = pp_out\nprefix = pp\n";
  }
  fs::remove_all(work("pp_out"));
  const Result r = run("experiment pp.ini --threads 2");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("mean_count_1") != std::string::npos);
  const fs::path manifest = work("pp_out") / "pp.manifest.json";
  REQUIRE(fs::exists(manifest));
  CHECK(fs::exists(work("pp_out") / "pp.trials.csv"));
  CHECK(slurp(work("pp_out") / "pp.trials.csv").find("trial,seed,excluded,T_1") == 0);

  const Result rep = run("report pp_out/pp.manifest.json --cdf-out pp_out/cdf.csv");
  REQUIRE(rep.status == 0);
  // The experiment printout is the report followed by the output paths.
  CHECK(r.out.rfind(rep.out, 0) == 0);
  CHECK(slurp(work("pp_out") / "cdf.csv").find("x,empirical_cdf,analytic_cdf") == 0);
  const auto m = htrm::read_manifest(manifest);
  CHECK(m.trials.rows.size() == 6);
}

TEST_CASE("sample then spectrum") {
  fs::remove(work("w.mtx"));
  REQUIRE(run("sample --ensemble dense_wigner --n 60 --seed 5 -o w.mtx").status == 0);
  CHECK(slurp(work("w.mtx")).find("%%MatrixMarket matrix coordinate real symmetric") == 0);
  const Result s = run("spectrum -i w.mtx -k 3");
  REQUIRE(s.status == 0);
  std::istringstream lines(s.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "index,eigenvalue,residual");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
  // Same seed, same file.
  REQUIRE(run("sample --ensemble dense_wigner --n 60 --seed 5 -o w2.mtx").status == 0);
  CHECK(slurp(work("w.mtx")) == slurp(work("w2.mtx")));
}
