#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "support/test_util.hpp"

using lrs::AdversaryStrategy;
using lrs::BitSelection;
using lrs::BitString;
using lrs::BudgetError;
using lrs::DomainError;
using lrs::Encoding;
using lrs::FieldMode;
using lrs::FieldParams;
using lrs::GameLog;
using lrs::GameOptions;
using lrs::GameRecord;
using lrs::GameResult;
using lrs::LeakageFunctionDescriptor;
using lrs::LeakageOracle;
using lrs::LeakageQuery;
using lrs::MemoryParts;
using lrs::OpaqueCallback;
using lrs::ParityOfSubset;
using lrs::ScriptedAdversary;
using lrs::SeededRng;
using lrs::TruncatedFieldProjection;
using testutil::make_encoding;

namespace {

MemoryParts two_parts(const std::string& a, const std::string& b) {
  return MemoryParts({lrs::bits_from_string(a), lrs::bits_from_string(b)});
}

}  // namespace

TEST_CASE("bit strings convert both ways", "[game]") {
  CHECK(lrs::bits_to_string(lrs::bits_from_string("10110")) == "10110");
  CHECK(lrs::bits_from_string("").empty());
  CHECK_THROWS_AS(lrs::bits_from_string("10x"), DomainError);
}

TEST_CASE("leakage function families evaluate correctly", "[game]") {
  const BitString part = lrs::bits_from_string("10110");

  SECTION("bit selection") {
    CHECK(lrs::bits_to_string(lrs::evaluate(BitSelection{{0, 2}}, part)) == "11");
    CHECK(lrs::bits_to_string(lrs::evaluate(BitSelection{{4, 3, 0}}, part)) == "011");
    CHECK(lrs::output_bits(LeakageFunctionDescriptor{BitSelection{{0, 2}}}) == 2);
    CHECK_THROWS_AS(lrs::evaluate(BitSelection{{5}}, part), DomainError);
  }
  SECTION("parity") {
    CHECK(lrs::bits_to_string(lrs::evaluate(ParityOfSubset{{0, 1, 2, 3, 4}}, part)) == "1");
    CHECK(lrs::bits_to_string(lrs::evaluate(ParityOfSubset{{1, 4}}, part)) == "0");
    CHECK(lrs::bits_to_string(lrs::evaluate(ParityOfSubset{{}}, part)) == "0");
    CHECK(lrs::output_bits(LeakageFunctionDescriptor{ParityOfSubset{{1, 4}}}) == 1);
    CHECK_THROWS_AS(lrs::evaluate(ParityOfSubset{{7}}, part), DomainError);
  }
  SECTION("truncated projection over a serialized share") {
    // p=11 has width 4; L=(9,5) serializes to 1001 0101.
    const BitString l_part = lrs::bits_from_string("10010101");
    CHECK(lrs::bits_to_string(lrs::evaluate(TruncatedFieldProjection{0, 4, 11}, l_part)) ==
          "1001");
    CHECK(lrs::bits_to_string(lrs::evaluate(TruncatedFieldProjection{1, 2, 11}, l_part)) == "01");
    CHECK_THROWS_AS(lrs::evaluate(TruncatedFieldProjection{0, 5, 11}, l_part), DomainError);
    CHECK_THROWS_AS(lrs::evaluate(TruncatedFieldProjection{2, 1, 11}, l_part), DomainError);
  }
  SECTION("opaque callback must honor its declared width") {
    const OpaqueCallback good{[](const BitString& m) { return BitString{m[0]}; }, 1};
    CHECK(lrs::evaluate(LeakageFunctionDescriptor{good}, part) == BitString{true});
    const OpaqueCallback lying{[](const BitString&) { return BitString{true, false}; }, 3};
    CHECK_THROWS_AS(lrs::evaluate(LeakageFunctionDescriptor{lying}, part), DomainError);
  }
  SECTION("descriptors are printable") {
    CHECK(lrs::describe(LeakageFunctionDescriptor{BitSelection{{0, 2}}}) == "bit-select:0,2");
    CHECK(lrs::describe(LeakageFunctionDescriptor{ParityOfSubset{{1, 4}}}) == "parity:1,4");
    CHECK(lrs::describe(LeakageFunctionDescriptor{TruncatedFieldProjection{1, 2, 11}}) ==
          "proj:1:2");
  }
}

TEST_CASE("coordinate bit width", "[game]") {
  CHECK(lrs::coord_bit_width(3) == 2);
  CHECK(lrs::coord_bit_width(11) == 4);
  CHECK(lrs::coord_bit_width(65537) == 17);
}

TEST_CASE("share serialization roundtrips", "[game]") {
  const FieldParams params(11, 2);
  const Encoding enc = make_encoding(params, {9, 5}, {2, 10});
  const MemoryParts mem = lrs::serialize_shares_to_memory(enc);
  REQUIRE(mem.count() == 2);
  CHECK(mem.part_bits() == 8);  // n * width(11) = 2 * 4
  CHECK(lrs::bits_to_string(mem.parts[0]) == "10010101");
  CHECK(lrs::bits_to_string(mem.parts[1]) == "00101010");
  const Encoding back = lrs::parse_memory_to_shares(mem, params);
  CHECK(back == enc);
}

TEST_CASE("memory parsing rejects malformed layouts", "[game]") {
  const FieldParams params(11, 1);
  CHECK_THROWS_AS(lrs::parse_memory_to_shares(
                      MemoryParts({lrs::bits_from_string("1001")}), params),
                  DomainError);  // one part
  CHECK_THROWS_AS(lrs::parse_memory_to_shares(two_parts("100", "010"), params),
                  DomainError);  // wrong width
  CHECK_THROWS_AS(lrs::parse_memory_to_shares(two_parts("1111", "0001"), params),
                  DomainError);  // 15 >= 11
  CHECK_THROWS_AS(lrs::parse_memory_to_shares(two_parts("0000", "0001"), params),
                  DomainError);  // zero coordinate
  CHECK_THROWS_AS(MemoryParts(std::vector<lrs::BitString>{}), DomainError);
  CHECK_THROWS_AS(two_parts("101", "01"), DomainError);  // unequal part lengths
}

TEST_CASE("oracle enforces the per-part budget exactly", "[game]") {
  LeakageOracle oracle(two_parts("10110", "01001"), 3);
  CHECK(oracle.query({1, BitSelection{{0, 2}}}) == lrs::bits_from_string("11"));
  CHECK(oracle.budget().consumed[0] == 2);

  // Two more bits would overdraw part 1; the query is refused and nothing
  // changes.
  CHECK_THROWS_AS(oracle.query({1, BitSelection{{3, 4}}}), BudgetError);
  CHECK(oracle.budget().consumed[0] == 2);

  // One more bit exactly exhausts part 1.
  CHECK(oracle.query({1, BitSelection{{1}}}) == lrs::bits_from_string("0"));
  CHECK(oracle.budget().consumed[0] == 3);
  CHECK_THROWS_AS(oracle.query({1, ParityOfSubset{{0}}}), BudgetError);

  // Part 2 has its own untouched budget.
  CHECK(oracle.query({2, BitSelection{{0, 1, 2}}}) == lrs::bits_from_string("010"));
  CHECK(oracle.budget().consumed[1] == 3);

  CHECK_THROWS_AS(oracle.query({0, ParityOfSubset{{0}}}), DomainError);
  CHECK_THROWS_AS(oracle.query({3, ParityOfSubset{{0}}}), DomainError);
}

TEST_CASE("a refused opaque query is never executed", "[game]") {
  bool executed = false;
  const OpaqueCallback cb{[&executed](const BitString& m) {
                            executed = true;
                            return BitString(m.begin(), m.begin() + 3);
                          },
                          3};
  LeakageOracle oracle(two_parts("10110", "01001"), 2);
  CHECK_THROWS_AS(oracle.query({1, cb}), BudgetError);
  CHECK_FALSE(executed);
  CHECK(oracle.budget().consumed[0] == 0);
}

TEST_CASE("scripted game: answers, refusals, audit", "[game]") {
  const std::vector<LeakageQuery> queries = {
      {1, BitSelection{{0, 1}}},   // answered, 2 bits
      {1, BitSelection{{2, 3}}},   // refused: budget 3, already used 2
      {1, ParityOfSubset{{0, 4}}}, // answered, 1 bit, part 1 now full
      {2, BitSelection{{0, 1, 2}}} // answered on part 2
  };
  ScriptedAdversary adversary(queries);
  const GameResult result = lrs::run_game(two_parts("10110", "01001"), adversary, 3);

  REQUIRE(result.log.records.size() == 4);
  CHECK_FALSE(result.aborted);
  CHECK(result.log.records[0].answer == lrs::bits_from_string("10"));
  CHECK(result.log.records[1].refused);
  CHECK(result.log.records[1].answer.empty());
  CHECK(result.log.records[2].answer == lrs::bits_from_string("1"));
  CHECK(result.log.records[3].answer == lrs::bits_from_string("010"));
  CHECK(lrs::bits_to_string(result.output) == "101010");
  CHECK(result.final_budget.consumed == std::vector<std::size_t>{3, 3});
  CHECK(lrs::audit_log(result.log, 3, 2));

  // Record lines serialize deterministically.
  CHECK(result.log.records[0].to_line() ==
        "index=1 part=1 descriptor=bit-select:0,1 width=2 answer=10 refused=0 consumed=2");
  CHECK(result.log.records[1].to_line() ==
        "index=2 part=1 descriptor=bit-select:2,3 width=2 answer=- refused=1 consumed=2");
}

TEST_CASE("zero queries is a valid strategy", "[game]") {
  ScriptedAdversary adversary({});
  const GameResult result = lrs::run_game(two_parts("1", "0"), adversary, 1);
  CHECK(result.output.empty());
  CHECK(result.log.records.empty());
  CHECK_FALSE(result.aborted);
  CHECK(lrs::audit_log(result.log, 1, 2));
}

namespace {

// Adapts its second query to the first answer: a 1 reads part 2 bit 0, a 0
// reads part 2 bit 1.
class BranchingAdversary : public AdversaryStrategy {
 public:
  std::optional<LeakageQuery> next_query(const GameLog& log) override {
    if (log.records.empty()) return LeakageQuery{1, BitSelection{{0}}};
    if (log.records.size() == 1) {
      const bool first = log.records[0].answer.at(0);
      return LeakageQuery{2, BitSelection{{first ? std::size_t{0} : std::size_t{1}}}};
    }
    return std::nullopt;
  }
  BitString output(const GameLog& log) override {
    BitString out;
    for (const auto& rec : log.records)
      out.insert(out.end(), rec.answer.begin(), rec.answer.end());
    return out;
  }
};

// Keeps issuing free (zero-width) queries forever.
class ChattyAdversary : public AdversaryStrategy {
 public:
  std::optional<LeakageQuery> next_query(const GameLog&) override {
    return LeakageQuery{1, BitSelection{{}}};
  }
  BitString output(const GameLog&) override { return {}; }
};

}  // namespace

TEST_CASE("adaptive strategies see earlier answers", "[game]") {
  BranchingAdversary adversary;
  // First bit of part 1 is 1 -> second query reads part 2 position 0.
  const GameResult high = lrs::run_game(two_parts("10", "01"), adversary, 2);
  CHECK(lrs::bits_to_string(high.output) == "10");
  // First bit 0 -> reads part 2 position 1.
  BranchingAdversary adversary2;
  const GameResult low = lrs::run_game(two_parts("01", "01"), adversary2, 2);
  CHECK(lrs::bits_to_string(low.output) == "01");
  CHECK(high.log.records[0].index == 1);
  CHECK(high.log.records[1].index == 2);
}

TEST_CASE("query cap aborts a non-terminating adversary", "[game]") {
  ChattyAdversary adversary;
  GameOptions opts;
  opts.max_queries = 5;
  const GameResult result = lrs::run_game(two_parts("1", "0"), adversary, 1, opts);
  CHECK(result.aborted);
  CHECK(result.log.records.size() == 5);
  CHECK(lrs::audit_log(result.log, 1, 2));
}

TEST_CASE("the audit catches tampered logs", "[game]") {
  ScriptedAdversary adversary({{1, BitSelection{{0, 1}}}, {2, BitSelection{{0}}}});
  const GameResult base = lrs::run_game(two_parts("10110", "01001"), adversary, 2);
  REQUIRE(lrs::audit_log(base.log, 2, 2));

  SECTION("an answer wider than its declared width") {
    GameLog log = base.log;
    log.records[0].answer.push_back(true);
    CHECK_FALSE(lrs::audit_log(log, 2, 2));
  }
  SECTION("a refused record that still carries bits") {
    GameLog log = base.log;
    log.records[1].refused = true;
    CHECK_FALSE(lrs::audit_log(log, 2, 2));
  }
  SECTION("a part index outside the memory") {
    GameLog log = base.log;
    log.records[1].part = 3;
    CHECK_FALSE(lrs::audit_log(log, 2, 2));
    log.records[1].part = 0;
    CHECK_FALSE(lrs::audit_log(log, 2, 2));
  }
  SECTION("indices out of order") {
    GameLog log = base.log;
    log.records[1].index = 1;
    CHECK_FALSE(lrs::audit_log(log, 2, 2));
  }
  SECTION("total answered bits beyond the budget") {
    GameLog log;
    for (std::size_t i = 1; i <= 2; ++i) {
      GameRecord rec;
      rec.index = i;
      rec.part = 1;
      rec.descriptor = "bit-select:0,1,2";
      rec.width = 3;
      rec.answer = lrs::bits_from_string("101");
      rec.refused = false;
      rec.consumed_after = 3 * i;
      log.records.push_back(rec);
    }
    CHECK_FALSE(lrs::audit_log(log, 4, 2));
    CHECK(lrs::audit_log(log, 6, 2));
  }
}

TEST_CASE("default budget values are pinned", "[game]") {
  CHECK(lrs::default_lambda(FieldParams(11, 2)) == 2);
  CHECK(lrs::default_lambda(FieldParams(65537, 1000)) == 7839);
  CHECK(lrs::default_lambda(FieldParams(3, 1, FieldMode::relaxed)) == 0);
  CHECK(lrs::default_lambda(FieldParams(11, 1)) == 0);
}

TEST_CASE("distance estimator sanity", "[game]") {
  SeededRng rng(21);
  const auto constant_zero = [](SeededRng&) { return lrs::bits_from_string("0"); };
  const auto constant_one = [](SeededRng&) { return lrs::bits_from_string("1"); };
  const auto coin = [](SeededRng& r) { return BitString{r.uniform_below(2) == 1}; };

  const lrs::DistanceReport same =
      lrs::estimate_statistical_distance(constant_zero, constant_zero, 2000, rng);
  CHECK(same.estimate == 0.0);
  CHECK(same.support == 1);

  const lrs::DistanceReport far =
      lrs::estimate_statistical_distance(constant_zero, constant_one, 2000, rng);
  CHECK(far.estimate == 1.0);
  CHECK(far.support == 2);
  CHECK(far.low() <= 1.0);
  CHECK(far.high() == 1.0);

  const lrs::DistanceReport fair =
      lrs::estimate_statistical_distance(coin, coin, 5000, rng);
  CHECK(fair.estimate < 0.1);
  CHECK(fair.trials == 5000);
}

TEST_CASE("a full game over serialized shares", "[game]") {
  const FieldParams params(11, 2);
  const Encoding enc = make_encoding(params, {9, 5}, {2, 10});
  const MemoryParts mem = lrs::serialize_shares_to_memory(enc);
  const std::size_t lambda = lrs::default_lambda(params);
  REQUIRE(lambda == 2);

  ScriptedAdversary adversary({{1, BitSelection{{0, 1}}}, {2, BitSelection{{2, 3}}}});
  const GameResult result = lrs::run_game(mem, adversary, lambda);
  // Part 1 holds L = (9,5) = 1001 0101; part 2 holds R = (2,10) = 0010 1010.
  CHECK(lrs::bits_to_string(result.output) == "1010");
  CHECK(result.final_budget.consumed == std::vector<std::size_t>{2, 2});
  CHECK(lrs::audit_log(result.log, lambda, mem.count()));
}
