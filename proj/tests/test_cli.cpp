#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "mub6/hadsearch.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI inside `dir`, capturing stdout and stderr together.
Run cli(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = "cd '" + dir.string() + "' && '" MUB6_CLI_PATH "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  r.out.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void flip_byte(const fs::path& p, std::uint64_t offset, unsigned char mask) {
  std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.get(c);
  f.seekp(static_cast<std::streamoff>(offset));
  f.put(static_cast<char>(c ^ mask));
}

bool contains(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check-vector examples") {
  const auto dir = mub6::test::scratch_dir("cli_vec");
  auto r = cli(dir, "check-vector 0,0,8,0,8,8 --kind ort --n 17");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "descend: survives"));
  CHECK(contains(r.out, "oracle: feasible_certified"));
  r = cli(dir, "check-vector 0,0,0,0,0 --kind ort --n 17");
  CHECK(contains(r.out, "rejected at generation 0"));
  CHECK(contains(r.out, "oracle: infeasible_certified"));
  r = cli(dir, "check-vector 0,0,0,6,8 --kind ub --n 17");
  CHECK(contains(r.out, "descend: survives"));
  CHECK(cli(dir, "check-vector 0,0,0,6,99 --kind ub --n 17").code == 1);
  CHECK(cli(dir, "check-vector 0,0,0,6,8 --kind xx").code == 1);
  CHECK(cli(dir, "no-such-command").code == 1);
}

TEST_CASE("pipeline at n = 7") {
  const auto dir = mub6::test::scratch_dir("cli_pipeline");
  auto r = cli(dir, "gen-sets --n 7 --out sets");
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "ort 3790"));
  CHECK(cli(dir, "--threads 3 gen-sets --n 7 --out sets3").code == 0);
  for (const char* name : {"ort_n7_d8.set", "ort_eps_n7_d8.set", "ub_n7_d8.set", "ub_eps_n7_d8.set"}) {
    CHECK(slurp(dir / "sets" / name) == slurp(dir / "sets3" / name));
  }

  r = cli(dir, "enumerate --n 7 --sets-dir sets --shard 63/64 --out pre.mat");
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "prehad 94790 complete"));
  CHECK(cli(dir, "enumerate --n 7 --sets-dir sets --shard 63/64 --out again.mat").code == 0);
  CHECK(slurp(dir / "pre.mat") == slurp(dir / "again.mat"));

  r = cli(dir, "verify pre.mat --sets-dir sets");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "clean"));

  r = cli(dir, "stage2 --in pre.mat --sets-dir sets --out c.crt --budget-ms 2000 --max-matrices 4");
  CHECK((r.code == 0 || r.code == 4));
  CHECK(contains(r.out, "partial"));
  r = cli(dir, "verify c.crt --n 7 --sets-dir sets");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "4 certificates"));
  CHECK(cli(dir, "verify c.crt").code == 1);

  CHECK(cli(dir, "stage2 --in pre.mat --sets-dir sets --out x.crt --n 17").code == 3);
  CHECK(cli(dir, "enumerate --n 7 --depth 9 --sets-dir sets --out y.mat").code == 1);
}

TEST_CASE("flipped bytes are reported at their offset") {
  const auto dir = mub6::test::scratch_dir("cli_flip");
  REQUIRE(cli(dir, "gen-sets --n 7 --kinds ort --out sets").code == 0);
  auto r = cli(dir, "verify sets/ort_n7_d8.set");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "clean"));

  const std::uint64_t offset = mub6::kSetHeaderSize + 10 * 200 + 6;
  fs::copy_file(dir / "sets" / "ort_n7_d8.set", dir / "ort.set");
  flip_byte(dir / "ort.set", offset, 0x40);
  r = cli(dir, "verify ort.set");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "offset " + std::to_string(offset)));

  // A swap that keeps the file well-formed is caught by regeneration.
  fs::copy_file(dir / "sets" / "ort_mon_n7_d8.set", dir / "mon.set");
  flip_byte(dir / "mon.set", mub6::kSetHeaderSize + 10 * 63 + 8, 0x01);
  r = cli(dir, "verify mon.set");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "offset"));

  REQUIRE(cli(dir, "enumerate --n 7 --sets-dir sets --shard 63/64 --out pre.mat").code == 0);
  const std::uint64_t rec = mub6::kStreamHeaderSize + 50 * 1000 + 10;
  flip_byte(dir / "pre.mat", rec, 0x20);
  r = cli(dir, "verify pre.mat --sets-dir sets");
  CHECK(r.code == 2);
  CHECK(contains(r.out, "offset " + std::to_string(mub6::kStreamHeaderSize + 50 * 1000)));
}

TEST_CASE("enumerate resumes from a checkpoint") {
  const auto dir = mub6::test::scratch_dir("cli_resume");
  REQUIRE(cli(dir, "gen-sets --n 7 --kinds ort --out sets").code == 0);
  const std::string base = "enumerate --n 7 --sets-dir sets --shard 63/64 ";
  REQUIRE(cli(dir, base + "--out clean.mat").code == 0);

  auto r = cli(dir, base + "--out part.mat --checkpoint ck.json --max-positions 0");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "partial"));
  CHECK(fs::exists(dir / "ck.json"));
  {
    // bytes written after the last checkpoint by an interrupted run
    std::ofstream junk(dir / "part.mat", std::ios::app | std::ios::binary);
    junk << std::string(77, '\x5a');
  }
  r = cli(dir, base + "--out part.mat --checkpoint ck.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "complete"));
  CHECK(slurp(dir / "part.mat") == slurp(dir / "clean.mat"));

  CHECK(cli(dir, "enumerate --n 7 --sets-dir sets --shard 62/64 --out part.mat --checkpoint ck.json").code == 3);

  r = cli(dir, base + "--out empty.mat --max-positions 0");
  REQUIRE(r.code == 0);
  r = cli(dir, "stage2 --in empty.mat --sets-dir sets --out empty.crt");
  CHECK(r.code == 0);
  CHECK(slurp(dir / "empty.crt") == "MUB6CRT1");
}

TEST_CASE("stage2 resumes from a checkpoint") {
  const auto dir = mub6::test::scratch_dir("cli_stage2");
  REQUIRE(cli(dir, "gen-sets --n 7 --out sets").code == 0);
  REQUIRE(cli(dir, "enumerate --n 7 --sets-dir sets --shard 63/64 --out pre.mat").code == 0);
  const std::string base = "stage2 --in pre.mat --sets-dir sets --out c.crt --checkpoint ck.json --budget-ms 2000 ";
  CHECK(contains(cli(dir, base + "--max-matrices 2").out, "partial"));
  auto r = cli(dir, base + "--max-matrices 3");
  CHECK(contains(r.out, "partial"));
  r = cli(dir, "verify c.crt --n 7 --sets-dir sets");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "5 certificates"));
}

TEST_CASE("shard plans drive enumerate") {
  const auto dir = mub6::test::scratch_dir("cli_plan");
  REQUIRE(cli(dir, "gen-sets --n 7 --kinds ort --out sets").code == 0);
  REQUIRE(cli(dir, "shard-plan --n 7 --shards 64 --sets-dir sets --out-dir plan --data-dir data").code == 0);
  CHECK(fs::exists(dir / "plan" / "shard_63_of_64.json"));
  fs::create_directories(dir / "data");
  auto r = cli(dir, "enumerate --manifest plan/shard_63_of_64.json");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "prehad 94790 complete"));
  REQUIRE(cli(dir, "enumerate --n 7 --sets-dir sets --shard 63/64 --out direct.mat").code == 0);
  CHECK(slurp(dir / "data" / "shard_63_of_64.mat") == slurp(dir / "direct.mat"));
}

}
