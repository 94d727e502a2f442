#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "support/test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI binary through the shell and captures stdout. stderr is
// discarded unless merge_stderr is set.
RunResult run_cli(const std::string& args, bool merge_stderr = false,
                  const std::string& env_prefix = "") {
  std::string cmd = env_prefix + std::string(LRS_CLI_PATH) + " " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  RunResult r;
  r.out = std::move(out);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    char tmpl[] = "/tmp/lrs_cli_test_XXXXXX";
    path = fs::path(mkdtemp(tmpl));
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

const std::string kGolden = std::string(LRS_GOLDEN_DIR) + "/worked_example";

}  // namespace

TEST_CASE("encode then decode recovers the secret", "[cli]") {
  TempDir dir;
  const RunResult enc = run_cli("encode --p 101 --n 4 --secret 42 --seed 9 --out-l " +
                                dir.file("l.vec") + " --out-r " + dir.file("r.vec") +
                                " --summary " + dir.file("enc.json"));
  CHECK(enc.exit_code == 0);
  CHECK(contains(enc.out, "command=encode"));
  CHECK(contains(enc.out, "decode_check=1"));
  CHECK(contains(lrs::read_text_file(dir.file("enc.json")), "\"command\": \"encode\""));

  const RunResult dec =
      run_cli("decode --l " + dir.file("l.vec") + " --r " + dir.file("r.vec"));
  CHECK(dec.exit_code == 0);
  CHECK(contains(dec.out, "secret=42"));
  CHECK(contains(dec.out, "field_mode=standard"));
}

TEST_CASE("small fields resolve to relaxed mode automatically", "[cli]") {
  TempDir dir;
  const RunResult enc = run_cli("encode --p 5 --n 2 --secret 3 --seed 1 --out-l " +
                                dir.file("l.vec") + " --out-r " + dir.file("r.vec"));
  CHECK(enc.exit_code == 0);
  CHECK(contains(enc.out, "field_mode=relaxed"));
}

TEST_CASE("the seed flag and the environment default agree", "[cli]") {
  TempDir dir;
  REQUIRE(run_cli("encode --p 101 --n 3 --secret 7 --seed 9 --out-l " + dir.file("a_l.vec") +
                  " --out-r " + dir.file("a_r.vec"))
              .exit_code == 0);
  REQUIRE(run_cli("encode --p 101 --n 3 --secret 7 --out-l " + dir.file("b_l.vec") +
                  " --out-r " + dir.file("b_r.vec"),
                  false, "LRS_SEED=9 ")
              .exit_code == 0);
  CHECK(lrs::read_text_file(dir.file("a_l.vec")) == lrs::read_text_file(dir.file("b_l.vec")));
  CHECK(lrs::read_text_file(dir.file("a_r.vec")) == lrs::read_text_file(dir.file("b_r.vec")));
}

TEST_CASE("golden worked example is reproduced byte-exactly", "[cli]") {
  TempDir dir;
  const std::string args = "refresh --l " + kGolden + "/in_l.vec --r " + kGolden +
                           "/in_r.vec --force-oracle " + kGolden + "/oracle.txt --seed 0" +
                           " --out-l " + dir.file("out_l.vec") + " --out-r " +
                           dir.file("out_r.vec") + " --views " + dir.file("views.txt") +
                           " --summary " + dir.file("summary.json");
  const RunResult first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == lrs::read_text_file(kGolden + "/stdout.txt"));
  CHECK(lrs::read_text_file(dir.file("out_l.vec")) ==
        lrs::read_text_file(kGolden + "/out_l.vec"));
  CHECK(lrs::read_text_file(dir.file("out_r.vec")) ==
        lrs::read_text_file(kGolden + "/out_r.vec"));
  CHECK(lrs::read_text_file(dir.file("views.txt")) ==
        lrs::read_text_file(kGolden + "/views.txt"));
  CHECK(lrs::read_text_file(dir.file("summary.json")) ==
        lrs::read_text_file(kGolden + "/summary.json"));

  // A second run produces the same bytes again.
  TempDir dir2;
  const std::string args2 = "refresh --l " + kGolden + "/in_l.vec --r " + kGolden +
                            "/in_r.vec --force-oracle " + kGolden + "/oracle.txt --seed 0" +
                            " --out-l " + dir2.file("out_l.vec") + " --out-r " +
                            dir2.file("out_r.vec") + " --views " + dir2.file("views.txt");
  const RunResult second = run_cli(args2);
  REQUIRE(second.exit_code == 0);
  CHECK(second.out == first.out);
  CHECK(lrs::read_text_file(dir2.file("views.txt")) ==
        lrs::read_text_file(dir.file("views.txt")));
}

TEST_CASE("refresh without a forced oracle still verifies", "[cli]") {
  TempDir dir;
  const RunResult r = run_cli("refresh --l " + kGolden + "/in_l.vec --r " + kGolden +
                              "/in_r.vec --seed 3 --out-l " + dir.file("l.vec") +
                              " --out-r " + dir.file("r.vec"));
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "forced_oracle=0"));
  CHECK(contains(r.out, "preserved=1"));
  CHECK(contains(r.out, "views_valid=1"));
  CHECK(contains(r.out, "within_budget=1"));

  const RunResult dec =
      run_cli("decode --l " + dir.file("l.vec") + " --r " + dir.file("r.vec"));
  CHECK(contains(dec.out, "secret=3"));  // <(2,3),(1,4)> = 14 = 3 mod 11
}

TEST_CASE("a forced oracle sample that restarts is an input error", "[cli]") {
  TempDir dir;
  // p=5, n=1, shares L=(2), R=(4): the scripted sample pushes R' to zero.
  lrs::write_text_file(dir.file("l.vec"), "lrs-vec v1 p=5 n=1\n2\n");
  lrs::write_text_file(dir.file("r.vec"), "lrs-vec v1 p=5 n=1\n4\n");
  lrs::write_text_file(dir.file("oracle.txt"), "lrs-oracle v1 p=5 n=1\n1\n1\n2\n3\n");
  const RunResult r = run_cli("refresh --l " + dir.file("l.vec") + " --r " + dir.file("r.vec") +
                                  " --force-oracle " + dir.file("oracle.txt"),
                              true);
  CHECK(r.exit_code == 2);
  CHECK(contains(r.out, "restart"));
}

TEST_CASE("reconstruct over the golden endpoints matches the protocol run", "[cli]") {
  TempDir dir;
  const RunResult r = run_cli("reconstruct --old-l " + kGolden + "/in_l.vec --old-r " + kGolden +
                              "/in_r.vec --new-l " + kGolden + "/out_l.vec --new-r " + kGolden +
                              "/out_r.vec --seed 3 --views " + dir.file("views.txt"));
  CHECK(r.exit_code == 0);
  // <A,B> depends only on the endpoints, so it matches the protocol's alpha
  // even under fresh offline randomness.
  CHECK(contains(r.out, "alpha=7"));
  CHECK(contains(r.out, "constraints_ok=1"));
  CHECK(contains(r.out, "messages=0"));
  CHECK(contains(lrs::read_text_file(dir.file("views.txt")), "messages=0\n"));
}

TEST_CASE("distribution equality subcommand", "[cli]") {
  SECTION("exhaustive inputs at p=5, n=1") {
    const RunResult r = run_cli("compare-dist --p 5 --n 1 --exhaustive-inputs");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "inputs=16"));
    CHECK(contains(r.out, "failures=0"));
    CHECK(contains(r.out, "all_equal=1"));
  }
  SECTION("single exact input at p=11, n=1") {
    const RunResult r = run_cli("compare-dist --p 11 --n 1 --secret 8 --seed 2");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "method=exact"));
    CHECK(contains(r.out, "all_equal=1"));
  }
  SECTION("oversized exact instances are refused, not attempted") {
    const RunResult r = run_cli("compare-dist --p 11 --n 2 --secret 3", true);
    CHECK(r.exit_code == 3);
    CHECK(contains(r.out, "refused:"));
  }
  SECTION("Monte Carlo at p=11, n=2") {
    const RunResult r = run_cli("compare-dist --p 11 --n 2 --secret 3 --mc 20000 --seed 5 --threads 2");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "method=mc"));
    CHECK(contains(r.out, "stat.joint.null_tv="));
    CHECK(contains(r.out, "stat.alpha.pass=1"));
    CHECK(contains(r.out, "pass=1"));
  }
}

TEST_CASE("restart-rate subcommand", "[cli]") {
  const RunResult r = run_cli("restart-rate --p 11 --n 2 --runs 3000 --seed 1 --threads 2");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "command=restart-rate"));
  CHECK(contains(r.out, "pass=1"));
}

TEST_CASE("bench subcommand flags non-doubling dimension grids", "[cli]") {
  SECTION("doubling grid passes") {
    const RunResult r = run_cli("bench --p 65537 --dims 8,16 --trials 100 --seed 2");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "ratio.16_over_8=2"));
    CHECK(contains(r.out, "pass=1"));
  }
  SECTION("a 1->3 jump fails the ratio gate") {
    const RunResult r = run_cli("bench --p 65537 --dims 1,3 --trials 50 --seed 2");
    CHECK(r.exit_code == 1);
    CHECK(contains(r.out, "pass=0"));
  }
}

TEST_CASE("leakage game subcommand", "[cli]") {
  TempDir dir;
  SECTION("answered queries and the log file") {
    const RunResult r = run_cli("game --p 11 --n 2 --secret 3 --seed 4 --lambda 2" +
                                std::string(" --adversary bit-select:1:0,1/bit-select:2:0,1") +
                                " --log " + dir.file("game.log"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "lambda=2"));
    CHECK(contains(r.out, "queries=2"));
    CHECK(contains(r.out, "refused=0"));
    CHECK(contains(r.out, "output_bits=4"));
    CHECK(contains(r.out, "consumed.1=2"));
    CHECK(contains(r.out, "consumed.2=2"));
    CHECK(contains(r.out, "audit_ok=1"));
    const std::string log = lrs::read_text_file(dir.file("game.log"));
    CHECK(contains(log, "index=1 part=1 descriptor=bit-select:0,1 width=2"));
    CHECK(contains(log, "refused=0"));
  }
  SECTION("an overdrawing query is refused but the game continues") {
    const RunResult r = run_cli(
        "game --p 11 --n 2 --secret 3 --seed 4 --lambda 1 --adversary proj:1:0:2/parity:2:0,1");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "queries=2"));
    CHECK(contains(r.out, "refused=1"));
    CHECK(contains(r.out, "output_bits=1"));
    CHECK(contains(r.out, "consumed.1=0"));
    CHECK(contains(r.out, "consumed.2=1"));
    CHECK(contains(r.out, "audit_ok=1"));
  }
  SECTION("default lambda comes from the field parameters") {
    const RunResult r = run_cli("game --p 11 --n 2 --secret 3 --seed 4 --adversary parity:1:0");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "lambda=2"));
  }
}

TEST_CASE("usage and input errors exit with code 2", "[cli]") {
  TempDir dir;
  CHECK(run_cli("encode --p 10 --n 2 --secret 3 --out-l " + dir.file("l.vec") + " --out-r " +
                    dir.file("r.vec"),
                true)
            .exit_code == 2);  // composite modulus
  CHECK(run_cli("frobnicate", true).exit_code == 2);          // unknown subcommand
  CHECK(run_cli("encode --p 11", true).exit_code == 2);       // missing required options
  CHECK(run_cli("refresh --l missing.vec --r missing.vec", true).exit_code == 2);

  // Shares from different fields cannot decode together.
  lrs::write_text_file(dir.file("l11.vec"), "lrs-vec v1 p=11 n=1\n2\n");
  lrs::write_text_file(dir.file("r13.vec"), "lrs-vec v1 p=13 n=1\n4\n");
  const RunResult mixed =
      run_cli("decode --l " + dir.file("l11.vec") + " --r " + dir.file("r13.vec"), true);
  CHECK(mixed.exit_code == 2);
  CHECK(contains(mixed.out, "error:"));

  // Mutually exclusive input selectors.
  CHECK(run_cli("compare-dist --p 5 --n 1 --secret 2 --l " + dir.file("l11.vec"), true).exit_code ==
        2);
}

TEST_CASE("game output bits equal the serialized share prefix", "[cli]") {
  // Reproduce the CLI's encoding in-process: same seed, same derivation label,
  // same constructive mode, then compare the leaked prefix bit-for-bit.
  lrs::FieldParams params(11, 2);
  lrs::SeededRng rng(4, "game");
  const lrs::Encoding enc =
      lrs::encode({3, 11}, params, rng, lrs::EncodeMode::constructive);
  const lrs::MemoryParts mem = lrs::serialize_shares_to_memory(enc);
  const std::string expected =
      lrs::bits_to_string(lrs::BitString{mem.parts[0][0], mem.parts[0][1]});

  const RunResult r =
      run_cli("game --p 11 --n 2 --secret 3 --seed 4 --lambda 2 --adversary bit-select:1:0,1");
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "output=" + expected + "\n"));
}
