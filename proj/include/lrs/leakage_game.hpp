#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/rng.hpp"

namespace lrs {

using BitString = std::vector<bool>;

inline std::string bits_to_string(const BitString& b) {
  std::string s;
  s.reserve(b.size());
  for (bool bit : b) s.push_back(bit ? '1' : '0');
  return s;
}

inline BitString bits_from_string(const std::string& s) {
  BitString b;
  b.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw DomainError("bit string may contain only 0 and 1");
    b.push_back(c == '1');
  }
  return b;
}

// The leaking memory: ell parts, each exactly part_bits bits.
struct MemoryParts {
  std::vector<BitString> parts;

  MemoryParts() = default;
  explicit MemoryParts(std::vector<BitString> ps) : parts(std::move(ps)) {
    if (parts.empty()) throw DomainError("memory must have at least one part");
    for (const auto& p : parts)
      if (p.size() != parts.front().size())
        throw DomainError("all memory parts must have the same bit length");
  }

  std::size_t count() const { return parts.size(); }
  std::size_t part_bits() const { return parts.front().size(); }
};

// Number of bits in the canonical fixed-width encoding of one coordinate.
inline std::size_t coord_bit_width(u64 p) {
  std::size_t w = 0;
  while (p) {
    ++w;
    p >>= 1;
  }
  return w;
}

// Canonical two-part layout: part 1 carries L, part 2 carries R, each
// coordinate big-endian with width = bit-length of p.
inline MemoryParts serialize_shares_to_memory(const Encoding& enc) {
  const std::size_t w = coord_bit_width(enc.params.p);
  auto pack = [&](const NonZeroVector& vec) {
    BitString out;
    out.reserve(w * vec.size());
    for (std::size_t i = 0; i < vec.size(); ++i) {
      for (std::size_t b = w; b-- > 0;) out.push_back((vec[i].value >> b) & 1);
    }
    return out;
  };
  return MemoryParts({pack(enc.L), pack(enc.R)});
}

inline Encoding parse_memory_to_shares(const MemoryParts& mem, const FieldParams& params) {
  if (mem.count() != 2) throw DomainError("expected exactly 2 memory parts");
  const std::size_t w = coord_bit_width(params.p);
  if (mem.part_bits() != w * params.n)
    throw DomainError("memory part length does not match n * bit-length(p)");
  Field f(params);
  auto unpack = [&](const BitString& bits) {
    FieldVector v;
    v.coords.reserve(params.n);
    for (std::size_t i = 0; i < params.n; ++i) {
      u64 val = 0;
      for (std::size_t b = 0; b < w; ++b) val = (val << 1) | (bits[i * w + b] ? 1 : 0);
      if (val >= params.p) throw DomainError("decoded coordinate out of range");
      v.coords.push_back({val, params.p});
    }
    return NonZeroVector(std::move(v));
  };
  return Encoding{unpack(mem.parts[0]), unpack(mem.parts[1]), params};
}

// Serializable leakage-function family. The game itself quantifies over
// arbitrary functions; the opaque callback covers that in-process, the named
// families cover CLI use and replay.
struct BitSelection {
  std::vector<std::size_t> positions;
};
struct ParityOfSubset {
  std::vector<std::size_t> positions;
};
// The first `bits` bits of coordinate `coord` in the part's fixed-width
// big-endian layout (most significant first).
struct TruncatedFieldProjection {
  std::size_t coord;
  std::size_t bits;
  u64 p;  // needed to know the coordinate width
};
struct OpaqueCallback {
  std::function<BitString(const BitString&)> fn;
  std::size_t declared_bits;
};

using LeakageFunctionDescriptor =
    std::variant<BitSelection, ParityOfSubset, TruncatedFieldProjection, OpaqueCallback>;

inline std::size_t output_bits(const LeakageFunctionDescriptor& d) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BitSelection>) return v.positions.size();
        if constexpr (std::is_same_v<T, ParityOfSubset>) return 1;
        if constexpr (std::is_same_v<T, TruncatedFieldProjection>) return v.bits;
        if constexpr (std::is_same_v<T, OpaqueCallback>) return v.declared_bits;
        return 0;
      },
      d);
}

inline std::string describe(const LeakageFunctionDescriptor& d) {
  std::ostringstream os;
  if (const auto* bs = std::get_if<BitSelection>(&d)) {
    os << "bit-select:";
    for (std::size_t i = 0; i < bs->positions.size(); ++i)
      os << (i ? "," : "") << bs->positions[i];
  } else if (const auto* ps = std::get_if<ParityOfSubset>(&d)) {
    os << "parity:";
    for (std::size_t i = 0; i < ps->positions.size(); ++i)
      os << (i ? "," : "") << ps->positions[i];
  } else if (const auto* tp = std::get_if<TruncatedFieldProjection>(&d)) {
    os << "proj:" << tp->coord << ":" << tp->bits;
  } else {
    os << "opaque:" << std::get<OpaqueCallback>(d).declared_bits;
  }
  return os.str();
}

inline BitString evaluate(const LeakageFunctionDescriptor& d, const BitString& part) {
  if (const auto* bs = std::get_if<BitSelection>(&d)) {
    BitString out;
    out.reserve(bs->positions.size());
    for (std::size_t pos : bs->positions) {
      if (pos >= part.size())
        throw DomainError("bit-selection position " + std::to_string(pos) + " out of range");
      out.push_back(part[pos]);
    }
    return out;
  }
  if (const auto* ps = std::get_if<ParityOfSubset>(&d)) {
    bool acc = false;
    for (std::size_t pos : ps->positions) {
      if (pos >= part.size())
        throw DomainError("parity position " + std::to_string(pos) + " out of range");
      acc ^= part[pos];
    }
    return BitString{acc};
  }
  if (const auto* tp = std::get_if<TruncatedFieldProjection>(&d)) {
    const std::size_t w = coord_bit_width(tp->p);
    if (tp->bits > w) throw DomainError("projection wider than coordinate width");
    const std::size_t start = tp->coord * w;
    if (start + w > part.size())
      throw DomainError("projection coordinate " + std::to_string(tp->coord) + " out of range");
    return BitString(part.begin() + start, part.begin() + start + tp->bits);
  }
  const auto& cb = std::get<OpaqueCallback>(d);
  BitString out = cb.fn(part);
  if (out.size() != cb.declared_bits)
    throw DomainError("opaque leakage function returned " + std::to_string(out.size()) +
                      " bits, declared " + std::to_string(cb.declared_bits));
  return out;
}

// Per-part budget of lambda bits; consumption is tracked per part and a query
// that would overdraw is refused without being executed.
struct Budget {
  std::size_t lambda = 0;
  std::vector<std::size_t> consumed;

  Budget() = default;
  Budget(std::size_t lambda, std::size_t num_parts) : lambda(lambda), consumed(num_parts, 0) {}
};

// One request to the leakage oracle: part index (1-based, as the adversary
// addresses parts) and the function to apply.
struct LeakageQuery {
  std::size_t part;
  LeakageFunctionDescriptor fn;
};

struct GameRecord {
  std::size_t index;  // strictly increasing, answer i delivered before query i+1
  std::size_t part;
  std::string descriptor;
  std::size_t width;
  BitString answer;  // empty when refused
  bool refused;
  std::size_t consumed_after;

  std::string to_line() const {
    std::ostringstream os;
    os << "index=" << index << " part=" << part << " descriptor=" << descriptor
       << " width=" << width << " answer=" << (refused ? "-" : bits_to_string(answer))
       << " refused=" << (refused ? 1 : 0) << " consumed=" << consumed_after;
    return os.str();
  }
};

struct GameLog {
  std::vector<GameRecord> records;
};

// The leakage oracle: answers f(M_x) while enforcing the per-part budget.
class LeakageOracle {
 public:
  LeakageOracle(MemoryParts mem, std::size_t lambda)
      : mem_(std::move(mem)), budget_(lambda, mem_.count()) {}

  // Throws BudgetError when the query would overdraw; state unchanged in that
  // case. Part indices are 1-based.
  BitString query(const LeakageQuery& q) {
    if (q.part < 1 || q.part > mem_.count())
      throw DomainError("part index " + std::to_string(q.part) + " out of range");
    const std::size_t width = output_bits(q.fn);
    std::size_t& used = budget_.consumed[q.part - 1];
    if (used + width > budget_.lambda)
      throw BudgetError("query of width " + std::to_string(width) + " on part " +
                        std::to_string(q.part) + " exceeds budget (" + std::to_string(used) + "/" +
                        std::to_string(budget_.lambda) + " bits used)");
    BitString answer = evaluate(q.fn, mem_.parts[q.part - 1]);
    used += width;
    return answer;
  }

  const Budget& budget() const { return budget_; }

 private:
  MemoryParts mem_;
  Budget budget_;
};

// Adaptive adversary interface: next_query sees the full log (including the
// answer to every earlier query) before it must commit to the next one.
class AdversaryStrategy {
 public:
  virtual ~AdversaryStrategy() = default;
  virtual std::optional<LeakageQuery> next_query(const GameLog& log) = 0;
  virtual BitString output(const GameLog& log) = 0;
};

// Plays back a fixed list of queries, then outputs the concatenation of every
// answered bit.
class ScriptedAdversary : public AdversaryStrategy {
 public:
  explicit ScriptedAdversary(std::vector<LeakageQuery> queries) : queries_(std::move(queries)) {}

  std::optional<LeakageQuery> next_query(const GameLog& log) override {
    if (log.records.size() >= queries_.size()) return std::nullopt;
    return queries_[log.records.size()];
  }

  BitString output(const GameLog& log) override {
    BitString out;
    for (const auto& rec : log.records)
      if (!rec.refused) out.insert(out.end(), rec.answer.begin(), rec.answer.end());
    return out;
  }

 private:
  std::vector<LeakageQuery> queries_;
};

struct GameOptions {
  std::size_t max_queries = 10000;
};

struct GameResult {
  BitString output;
  GameLog log;
  Budget final_budget;
  bool aborted = false;  // adversary hit the query cap
};

// Drives the adaptive query loop: refused queries are recorded (with state
// unchanged) and the game continues; exceeding the query cap aborts with the
// log preserved.
inline GameResult run_game(const MemoryParts& mem, AdversaryStrategy& adversary,
                           std::size_t lambda, const GameOptions& opts = {}) {
  LeakageOracle oracle(mem, lambda);
  GameResult result;
  for (;;) {
    if (result.log.records.size() >= opts.max_queries) {
      result.aborted = true;
      break;
    }
    std::optional<LeakageQuery> q = adversary.next_query(result.log);
    if (!q) break;
    GameRecord rec;
    rec.index = result.log.records.size() + 1;
    rec.part = q->part;
    rec.descriptor = describe(q->fn);
    rec.width = output_bits(q->fn);
    try {
      rec.answer = oracle.query(*q);
      rec.refused = false;
    } catch (const BudgetError&) {
      rec.refused = true;
    }
    rec.consumed_after = q->part >= 1 && q->part <= oracle.budget().consumed.size()
                             ? oracle.budget().consumed[q->part - 1]
                             : 0;
    result.log.records.push_back(std::move(rec));
  }
  result.output = adversary.output(result.log);
  result.final_budget = oracle.budget();
  return result;
}

// Recounts answered bits per part straight from the log, independent of the
// oracle's own counters. Returns true when no part exceeds lambda.
inline bool audit_log(const GameLog& log, std::size_t lambda, std::size_t num_parts) {
  std::vector<std::size_t> totals(num_parts, 0);
  std::size_t last_index = 0;
  for (const auto& rec : log.records) {
    if (rec.index <= last_index) return false;  // adaptivity order broken
    last_index = rec.index;
    if (rec.part < 1 || rec.part > num_parts) return false;
    if (!rec.refused) {
      if (rec.answer.size() != rec.width) return false;
      totals[rec.part - 1] += rec.answer.size();
    } else if (!rec.answer.empty()) {
      return false;  // a refused query must deliver no bits
    }
  }
  for (std::size_t t : totals)
    if (t > lambda) return false;
  return true;
}

// Empirical total-variation distance between two sampled distributions of
// adversary outputs, with a conservative radius of 3*sqrt(support)/sqrt(N).
// Security quantities are reported, never asserted.
struct DistanceReport {
  double estimate = 0;
  double radius = 0;
  std::size_t support = 0;
  std::size_t trials = 0;

  double low() const { return std::max(0.0, estimate - radius); }
  double high() const { return std::min(1.0, estimate + radius); }
};

inline DistanceReport estimate_statistical_distance(
    const std::function<BitString(SeededRng&)>& sample_a,
    const std::function<BitString(SeededRng&)>& sample_b, std::size_t trials, SeededRng& rng) {
  std::map<std::string, std::size_t> hist_a, hist_b;
  for (std::size_t i = 0; i < trials; ++i) {
    SeededRng ra = rng.derive("dist-a", i);
    SeededRng rb = rng.derive("dist-b", i);
    ++hist_a[bits_to_string(sample_a(ra))];
    ++hist_b[bits_to_string(sample_b(rb))];
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> joined;
  for (const auto& [k, v] : hist_a) joined[k].first = v;
  for (const auto& [k, v] : hist_b) joined[k].second = v;
  double tv = 0;
  for (const auto& [k, v] : joined)
    tv += std::abs(static_cast<double>(v.first) - static_cast<double>(v.second));
  tv /= 2.0 * static_cast<double>(trials);
  DistanceReport rep;
  rep.estimate = tv;
  rep.support = joined.size();
  rep.trials = trials;
  rep.radius = 3.0 * std::sqrt(static_cast<double>(joined.size())) /
               std::sqrt(static_cast<double>(trials));
  return rep;
}

// The default per-part budget for an n-dimensional encoding over F_p:
// floor(0.49 * n * log2(p) - 1), clamped at zero.
inline std::size_t default_lambda(const FieldParams& params) {
  const double bits = 0.49 * static_cast<double>(params.n) * std::log2(static_cast<double>(params.p)) - 1.0;
  if (bits <= 0) return 0;
  return static_cast<std::size_t>(std::floor(bits));
}

}  // namespace lrs
