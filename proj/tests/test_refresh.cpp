#include <deque>
#include <vector>

#include "support/test_util.hpp"

using lrs::Channel;
using lrs::ConfigError;
using lrs::Direction;
using lrs::DomainError;
using lrs::Encoding;
using lrs::FieldMode;
using lrs::FieldParams;
using lrs::OpCounter;
using lrs::OracleSample;
using lrs::OracleSampler;
using lrs::RandomOracleSampler;
using lrs::RefreshOptions;
using lrs::RefreshTrace;
using lrs::RefusalError;
using lrs::ScriptedOracleSampler;
using lrs::SeededRng;
using lrs::u64;
using testutil::fv;
using testutil::make_encoding;
using testutil::make_sample;
using testutil::nz;

namespace {

// Replays one fixed sample forever; drives the restart-cap test.
class FixedSampler : public OracleSampler {
 public:
  explicit FixedSampler(OracleSample s) : sample_(std::move(s)) {}
  OracleSample sample(const FieldParams&, SeededRng&) override { return sample_; }

 private:
  OracleSample sample_;
};

// p=5, n=1 input (L,R) = (2,4) with a sample that forces a first-stage
// restart: V = 2^{-1} * 1 = 3, X = 3*2 = 1, R' = 4 + 1 = 0.
const FieldParams kP5(5, 1);
const lrs::Encoding kRestartInput = make_encoding(kP5, {2}, {4});
const OracleSample kRestartSample = make_sample(kP5, {1}, {1}, {2}, {3});
// A follow-up sample that accepts: X = 3*4 = 2, R' = 1; V~ = 1, L' = 3.
const OracleSample kAcceptSample = make_sample(kP5, {1}, {1}, {4}, {1});

}  // namespace

TEST_CASE("worked example, every intermediate value", "[refresh]") {
  testutil::WorkedExample wx;
  const RefreshTrace trace = testutil::run_worked_example();

  CHECK(trace.output.L == wx.l_prime);
  CHECK(trace.output.R == wx.r_prime);
  CHECK(trace.alpha.value == wx.alpha);
  CHECK(trace.restarts == 0);

  CHECK(trace.view_l.L == wx.input.L);
  CHECK(trace.view_l.A == wx.sample.A);
  CHECK(trace.view_l.V == wx.v);
  CHECK(trace.view_l.A_tilde == wx.sample.A_tilde);
  CHECK(trace.view_l.V_tilde == wx.v_tilde);
  CHECK(trace.view_r.R == wx.input.R);
  CHECK(trace.view_r.B == wx.sample.B);
  CHECK(trace.view_r.V == wx.v);
  CHECK(trace.view_r.B_tilde == wx.sample.B_tilde);
  CHECK(trace.view_r.V_tilde == wx.v_tilde);

  REQUIRE(trace.messages.size() == 2);
  CHECK(trace.messages[0].dir == Direction::l_to_r);
  CHECK(trace.messages[0].payload == wx.v);
  CHECK(trace.messages[1].dir == Direction::r_to_l);
  CHECK(trace.messages[1].payload == wx.v_tilde);
  CHECK(trace.failed_messages.empty());

  REQUIRE(trace.attempt_ops.size() == 1);
  CHECK(trace.op_count() == OpCounter{4, 8, 4});  // 2n adds, 4n muls, 2n invs
  CHECK(trace.op_count().total() == 16);
  CHECK(trace.op_count_total() == trace.op_count());

  CHECK(lrs::decode(trace.output).value == lrs::decode(wx.input).value);
  CHECK(lrs::verify_views(trace, wx.input));
}

TEST_CASE("refresh preserves the secret across fields and dimensions", "[refresh]") {
  const std::vector<FieldParams> grid = {
      FieldParams(11, 2),           FieldParams(13, 3),
      FieldParams(101, 8),          FieldParams(5, 2, FieldMode::relaxed),
      FieldParams(7, 8, FieldMode::relaxed)};
  for (const FieldParams& params : grid) {
    lrs::Field f(params);
    RandomOracleSampler oracle;
    SeededRng rng(params.p * 1000 + params.n);
    for (int trial = 0; trial < 200; ++trial) {
      const Encoding enc{f.sample_nonzero_vector(rng), f.sample_nonzero_vector(rng), params};
      Channel channel;
      const RefreshTrace trace = lrs::refresh(enc, oracle, channel, rng);
      REQUIRE(lrs::decode(trace.output) == lrs::decode(enc));
      REQUIRE_FALSE(lrs::has_zero_coordinate(trace.output.L.vec()));
      REQUIRE_FALSE(lrs::has_zero_coordinate(trace.output.R.vec()));
      REQUIRE(lrs::verify_views(trace, enc));
      REQUIRE(trace.messages.size() == 2);
      REQUIRE(trace.attempt_ops.size() == trace.restarts + 1);
      REQUIRE(trace.failed_messages.size() == trace.restarts);
      // The accepting attempt costs exactly 2n inversions, 4n multiplications
      // and 2n additions; a failed attempt never costs more.
      const u64 n = params.n;
      REQUIRE(trace.op_count() == OpCounter{2 * n, 4 * n, 2 * n});
      for (const OpCounter& ops : trace.attempt_ops) REQUIRE(ops.total() <= 8 * n);
    }
  }
}

TEST_CASE("forced restart, attempt by attempt", "[refresh]") {
  ScriptedOracleSampler oracle({kRestartSample, kAcceptSample});
  Channel channel;
  SeededRng rng(0);
  const RefreshTrace trace = lrs::refresh(kRestartInput, oracle, channel, rng);

  CHECK(trace.restarts == 1);
  REQUIRE(trace.attempt_ops.size() == 2);
  // The failed attempt stopped after the first stage: n invs, 2n muls, n adds.
  CHECK(trace.attempt_ops[0] == OpCounter{1, 2, 1});
  CHECK(trace.attempt_ops[1] == OpCounter{2, 4, 2});
  CHECK(trace.op_count_total() == OpCounter{3, 6, 3});

  // The discarded attempt sent only the first message.
  REQUIRE(trace.failed_messages.size() == 1);
  REQUIRE(trace.failed_messages[0].size() == 1);
  CHECK(trace.failed_messages[0][0].dir == Direction::l_to_r);
  CHECK(trace.messages.size() == 2);
  // The channel transcript keeps everything: 1 failed + 2 accepted messages.
  CHECK(channel.transcript().size() == 3);

  CHECK(trace.output.L == nz(5, {3}));
  CHECK(trace.output.R == nz(5, {1}));
  CHECK(lrs::decode(trace.output).value == 3);
  CHECK(lrs::verify_views(trace, kRestartInput));
}

TEST_CASE("restart cap turns into a refusal", "[refresh]") {
  FixedSampler oracle(kRestartSample);
  Channel channel;
  SeededRng rng(0);
  RefreshOptions opts;
  opts.restart_cap = 5;
  try {
    lrs::refresh(kRestartInput, oracle, channel, rng, opts);
    FAIL("expected RefusalError");
  } catch (const RefusalError& e) {
    CHECK(e.size_estimate == 5);
  }
}

TEST_CASE("refresh demands a fresh channel", "[refresh]") {
  testutil::WorkedExample wx;
  ScriptedOracleSampler oracle({wx.sample});
  SeededRng rng(0);
  Channel channel;
  channel.send_to_r(fv(11, {1, 2}));
  CHECK_THROWS_AS(lrs::refresh(wx.input, oracle, channel, rng), ConfigError);
}

TEST_CASE("refresh rejects a malformed encoding", "[refresh]") {
  const FieldParams params(11, 2);
  const Encoding bad{nz(11, {2}), nz(11, {1, 4}), params};  // L has the wrong length
  RandomOracleSampler oracle;
  Channel channel;
  SeededRng rng(0);
  CHECK_THROWS_AS(lrs::refresh(bad, oracle, channel, rng), DomainError);
}

TEST_CASE("scripted oracle for the wrong field is rejected", "[refresh]") {
  testutil::WorkedExample wx;
  ScriptedOracleSampler oracle({make_sample(FieldParams(13, 2), {1, 2}, {2, 1}, {5, 5}, {1, 1})});
  Channel channel;
  SeededRng rng(0);
  CHECK_THROWS_AS(lrs::refresh(wx.input, oracle, channel, rng), ConfigError);
}

TEST_CASE("view verification rejects tampering", "[refresh]") {
  testutil::WorkedExample wx;
  const RefreshTrace good = testutil::run_worked_example();
  REQUIRE(lrs::verify_views(good, wx.input));

  SECTION("altered message vector") {
    RefreshTrace t = testutil::run_worked_example();
    t.view_l.V.coords[0] = {(t.view_l.V[0].value + 1) % 11, 11};
    CHECK_FALSE(lrs::verify_views(t, wx.input));
  }
  SECTION("altered output share") {
    RefreshTrace t = testutil::run_worked_example();
    t.output.R = nz(11, {8, 1});
    CHECK_FALSE(lrs::verify_views(t, wx.input));
  }
  SECTION("views disagree on V~") {
    RefreshTrace t = testutil::run_worked_example();
    t.view_r.V_tilde.coords[1] = {(t.view_r.V_tilde[1].value + 1) % 11, 11};
    CHECK_FALSE(lrs::verify_views(t, wx.input));
  }
  SECTION("wrong original encoding") {
    CHECK_FALSE(lrs::verify_views(good, make_encoding(wx.params, {2, 3}, {1, 5})));
  }
}

TEST_CASE("refresh is deterministic per seed", "[refresh]") {
  const FieldParams params(101, 4);
  const Encoding enc = make_encoding(params, {2, 3, 4, 5}, {6, 7, 8, 9});
  auto run = [&](u64 seed) {
    RandomOracleSampler oracle;
    Channel channel;
    SeededRng rng(seed);
    return lrs::refresh(enc, oracle, channel, rng);
  };
  const RefreshTrace a = run(7);
  const RefreshTrace b = run(7);
  const RefreshTrace c = run(8);
  CHECK(a.output == b.output);
  CHECK(a.view_l == b.view_l);
  CHECK(a.view_r == b.view_r);
  CHECK_FALSE(a.output == c.output);
}
