#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lrs/channel.hpp"
#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/leakfree_oracle.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/reconstructor.hpp"
#include "lrs/refresh.hpp"
#include "lrs/rng.hpp"
#include "lrs/stats.hpp"

namespace lrs {

// One sample of either experiment: the fresh share pair plus both parties'
// (real or reconstructed) views. Two experiment samples are "the same outcome"
// exactly when all of these agree.
struct ExperimentOutcome {
  Encoding output;
  ViewL view_l;
  ViewR view_r;

  friend bool operator==(const ExperimentOutcome&, const ExperimentOutcome&) = default;
};

// Canonical flattening of an outcome into 12n residues. Block layout (each
// block is n coordinates); V and V~ appear once per view, mirroring the views
// as each party holds them.
namespace outcome_block {
constexpr std::size_t l_new = 0;
constexpr std::size_t r_new = 1;
constexpr std::size_t vl_l = 2;
constexpr std::size_t vl_a = 3;
constexpr std::size_t vl_v = 4;
constexpr std::size_t vl_a_tilde = 5;
constexpr std::size_t vl_v_tilde = 6;
constexpr std::size_t vr_r = 7;
constexpr std::size_t vr_b = 8;
constexpr std::size_t vr_v = 9;
constexpr std::size_t vr_b_tilde = 10;
constexpr std::size_t vr_v_tilde = 11;
constexpr std::size_t count = 12;
}  // namespace outcome_block

inline std::vector<u64> canonical_coords(const ExperimentOutcome& o) {
  std::vector<u64> out;
  out.reserve(outcome_block::count * o.output.params.n);
  auto push = [&](const FieldVector& v) {
    for (const auto& c : v.coords) out.push_back(c.value);
  };
  push(o.output.L.vec());
  push(o.output.R.vec());
  push(o.view_l.L.vec());
  push(o.view_l.A.vec());
  push(o.view_l.V);
  push(o.view_l.A_tilde);
  push(o.view_l.V_tilde);
  push(o.view_r.R.vec());
  push(o.view_r.B);
  push(o.view_r.V);
  push(o.view_r.B_tilde.vec());
  push(o.view_r.V_tilde);
  return out;
}

namespace detail {

inline constexpr u128 kU128Max = ~static_cast<u128>(0);

inline u128 saturating_mul_u128(u128 a, u128 b) {
  if (a == 0 || b == 0) return 0;
  if (a > kU128Max / b) return kU128Max;
  return a * b;
}

inline u128 saturating_pow_u128(u128 base, std::size_t exp) {
  u128 acc = 1;
  for (std::size_t i = 0; i < exp; ++i) acc = saturating_mul_u128(acc, base);
  return acc;
}

inline unsigned long long clamp_to_ull(u128 v) {
  const u128 kMax = static_cast<u128>(~0ULL);
  return v > kMax ? ~0ULL : static_cast<unsigned long long>(v);
}

inline std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

// Mixed-radix odometer: digits[i] runs over [lo[i], hi[i]] inclusive,
// rightmost digit fastest. Returns false when every combination was visited.
inline bool advance_odometer(std::vector<u64>& digits, const std::vector<u64>& lo,
                             const std::vector<u64>& hi) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < hi[i]) {
      ++digits[i];
      return true;
    }
    digits[i] = lo[i];
  }
  return false;
}

// Splits [0, total) into near-equal chunks and runs fn(thread_idx, begin, end)
// on each, on its own thread when threads > 1. Callers keep determinism by
// deriving all randomness from the item index, never from the thread.
template <typename Fn>
inline void run_partitioned(u64 total, std::size_t threads, Fn&& fn) {
  if (threads < 2 || total < 2 * threads) {
    fn(std::size_t{0}, u64{0}, total);
    return;
  }
  if (threads > total) threads = static_cast<std::size_t>(total);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    const u64 begin = total * t / threads;
    const u64 end = total * (t + 1) / threads;
    pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Packs canonical residues into one 128-bit key, base p, first coordinate in
// the lowest digit. Throws RefusalError when p^(#coords) does not fit.
inline u128 pack_coords(const std::vector<u64>& coords, u64 p) {
  if (detail::saturating_pow_u128(p, coords.size()) == detail::kU128Max)
    throw RefusalError("outcome key does not fit in 128 bits (p=" + std::to_string(p) +
                           ", coords=" + std::to_string(coords.size()) + ")",
                       detail::clamp_to_ull(detail::kU128Max));
  u128 acc = 0;
  for (std::size_t i = coords.size(); i-- > 0;) acc = acc * p + coords[i];
  return acc;
}

// ---------------------------------------------------------------------------
// The two experiments.
// ---------------------------------------------------------------------------

// Protocol experiment: run the interactive refresh on (L, R) and output the
// fresh shares together with both real views.
inline ExperimentOutcome run_refresh_experiment(const Encoding& enc, OracleSampler& oracle,
                                                SeededRng& rng, const RefreshOptions& opts = {}) {
  Channel channel;
  RefreshTrace trace = refresh(enc, oracle, channel, rng, opts);
  return ExperimentOutcome{std::move(trace.output), std::move(trace.view_l),
                           std::move(trace.view_r)};
}

// Simulation experiment: sample an independent fresh encoding of the same
// secret plus offline randomness (V, V~), then reconstruct both views without
// any interaction.
inline ExperimentOutcome run_reconstruct_refresh_experiment(const Encoding& enc, SeededRng& rng) {
  FieldElement s = decode(enc);
  Encoding fresh = sample_encoding_pair_with_secret(s, enc.params, rng);
  CommonRandomness cr = sample_common_randomness(enc.params, rng);
  auto views = reconstruct(enc, fresh, cr);
  return ExperimentOutcome{std::move(fresh), std::move(views.first), std::move(views.second)};
}

// ---------------------------------------------------------------------------
// Exact distributions by exhaustive enumeration.
// ---------------------------------------------------------------------------

// A finitely-supported distribution with exact rational probabilities
// count/total. For the protocol experiment, total counts only accepting
// oracle draws: restarted draws are discarded and the attempt repeats with an
// independent draw, so the accepted-run distribution is exactly the raw
// distribution conditioned on acceptance.
struct ExactDistribution {
  std::map<std::vector<u64>, u64> counts;
  u64 total = 0;
  u64 rejected = 0;  // protocol side: oracle draws that led to a restart

  std::size_t support() const { return counts.size(); }
};

// Upper bound on the work of enumerating the protocol experiment: the raw
// oracle product space (F\{0})^n x F^n x F^n x (F\{0})^n before the C1 filter.
inline u128 refresh_enumeration_size(const FieldParams& params) {
  const u128 per_dim = detail::saturating_mul_u128(
      static_cast<u128>(params.p - 1) * (params.p - 1), static_cast<u128>(params.p) * params.p);
  return detail::saturating_pow_u128(per_dim, params.n);
}

// Upper bound for the simulation side: share pairs times offline randomness,
// (p-1)^(4n).
inline u128 reconstruct_enumeration_size(const FieldParams& params) {
  return detail::saturating_pow_u128(static_cast<u128>(params.p - 1), 4 * params.n);
}

constexpr u64 kEnumerationGuard = 100'000'000;

namespace detail {

inline void require_enumerable(u128 size, const char* what) {
  if (size > kEnumerationGuard)
    throw RefusalError(std::string(what) + " enumeration needs " + u128_to_string(size) +
                           " cases, above the guard of " + std::to_string(kEnumerationGuard),
                       clamp_to_ull(size));
}

}  // namespace detail

// Exact outcome distribution of the protocol experiment on (L, R): every
// C1-satisfying oracle tuple is fed through the real two-party protocol once.
// Tuples whose attempt restarts are tallied in `rejected`.
inline ExactDistribution exact_distribution_refresh(const Encoding& enc) {
  const FieldParams& params = enc.params;
  detail::require_enumerable(refresh_enumeration_size(params), "protocol experiment");
  const u64 p = params.p;
  const std::size_t n = params.n;

  // Digit layout: A (nonzero), A~, B, B~ (nonzero), n coordinates each.
  std::vector<u64> lo, hi;
  lo.reserve(4 * n);
  hi.reserve(4 * n);
  auto add_range = [&](u64 l, u64 h, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      lo.push_back(l);
      hi.push_back(h);
    }
  };
  add_range(1, p - 1, n);  // A
  add_range(0, p - 1, n);  // A~
  add_range(0, p - 1, n);  // B
  add_range(1, p - 1, n);  // B~

  Field f(params);
  ExactDistribution dist;
  std::vector<u64> d = lo;
  do {
    // C1 check on raw residues before touching protocol machinery.
    u64 acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc = static_cast<u64>((acc + static_cast<u128>(d[i]) * d[2 * n + i]) % p);
      acc = static_cast<u64>((acc + static_cast<u128>(d[n + i]) * d[3 * n + i]) % p);
    }
    if (acc != 0) continue;

    std::vector<u64> a(d.begin(), d.begin() + n);
    std::vector<u64> a_tilde(d.begin() + n, d.begin() + 2 * n);
    std::vector<u64> b(d.begin() + 2 * n, d.begin() + 3 * n);
    std::vector<u64> b_tilde(d.begin() + 3 * n, d.begin() + 4 * n);
    OracleSample sample{NonZeroVector(f.vector_from(a)), f.vector_from(a_tilde),
                        f.vector_from(b), NonZeroVector(f.vector_from(b_tilde)), params};
    ScriptedOracleSampler oracle({sample});
    Channel channel;
    SeededRng unused(0);
    try {
      RefreshTrace trace = refresh(enc, oracle, channel, unused);
      ExperimentOutcome outcome{std::move(trace.output), std::move(trace.view_l),
                                std::move(trace.view_r)};
      ++dist.counts[canonical_coords(outcome)];
      ++dist.total;
    } catch (const OracleExhaustedError&) {
      ++dist.rejected;  // the attempt restarted and asked for a second draw
    }
  } while (detail::advance_odometer(d, lo, hi));
  return dist;
}

// Exact outcome distribution of the simulation experiment on (L, R): every
// fresh share pair with the same inner product, crossed with every offline
// (V, V~), is fed through the reconstructor once.
inline ExactDistribution exact_distribution_reconstruct(const Encoding& enc) {
  const FieldParams& params = enc.params;
  detail::require_enumerable(reconstruct_enumeration_size(params), "simulation experiment");
  const u64 p = params.p;
  const std::size_t n = params.n;
  Field f(params);
  const FieldElement s = decode(enc);

  // Pass 1: all (L', R') over nonzero coordinates with matching inner product.
  std::vector<Encoding> pairs;
  {
    std::vector<u64> lo(2 * n, 1), hi(2 * n, p - 1), d = lo;
    do {
      u64 acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        acc = static_cast<u64>((acc + static_cast<u128>(d[i]) * d[n + i]) % p);
      if (acc != s.value) continue;
      std::vector<u64> l_new(d.begin(), d.begin() + n);
      std::vector<u64> r_new(d.begin() + n, d.end());
      pairs.push_back(Encoding{NonZeroVector(f.vector_from(l_new)),
                               NonZeroVector(f.vector_from(r_new)), params});
    } while (detail::advance_odometer(d, lo, hi));
  }

  // Pass 2: cross with every (V, V~) and reconstruct.
  ExactDistribution dist;
  std::vector<u64> lo(2 * n, 1), hi(2 * n, p - 1);
  for (const Encoding& fresh : pairs) {
    std::vector<u64> d = lo;
    do {
      std::vector<u64> v(d.begin(), d.begin() + n);
      std::vector<u64> v_tilde(d.begin() + n, d.end());
      CommonRandomness cr{NonZeroVector(f.vector_from(v)), NonZeroVector(f.vector_from(v_tilde))};
      auto views = reconstruct(enc, fresh, cr);
      ExperimentOutcome outcome{fresh, std::move(views.first), std::move(views.second)};
      ++dist.counts[canonical_coords(outcome)];
      ++dist.total;
    } while (detail::advance_odometer(d, lo, hi));
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Exact comparison.
// ---------------------------------------------------------------------------

struct DistributionEqualityReport {
  bool equal = true;
  std::size_t support_a = 0;
  std::size_t support_b = 0;
  u64 total_a = 0;
  u64 total_b = 0;
  std::string mismatch;  // first difference, empty when equal
};

// Exact equality of the two rational distributions: identical supports and,
// per outcome, count_a/total_a == count_b/total_b compared by
// cross-multiplication — no floating point anywhere.
inline DistributionEqualityReport compare_exact(const ExactDistribution& a,
                                                const ExactDistribution& b) {
  DistributionEqualityReport rep;
  rep.support_a = a.support();
  rep.support_b = b.support();
  rep.total_a = a.total;
  rep.total_b = b.total;
  if (a.total == 0 || b.total == 0) {
    rep.equal = false;
    rep.mismatch = "empty distribution";
    return rep;
  }
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  auto describe = [](const std::vector<u64>& key, u64 ca, u64 ta, u64 cb, u64 tb) {
    std::ostringstream os;
    os << "outcome [";
    for (std::size_t i = 0; i < key.size(); ++i) os << (i ? "," : "") << key[i];
    os << "] has probability " << ca << "/" << ta << " vs " << cb << "/" << tb;
    return os.str();
  };
  while (ia != a.counts.end() || ib != b.counts.end()) {
    if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
      rep.equal = false;
      rep.mismatch = describe(ia->first, ia->second, a.total, 0, b.total);
      return rep;
    }
    if (ia == a.counts.end() || ib->first < ia->first) {
      rep.equal = false;
      rep.mismatch = describe(ib->first, 0, a.total, ib->second, b.total);
      return rep;
    }
    const u128 lhs = static_cast<u128>(ia->second) * b.total;
    const u128 rhs = static_cast<u128>(ib->second) * a.total;
    if (lhs != rhs) {
      rep.equal = false;
      rep.mismatch = describe(ia->first, ia->second, a.total, ib->second, b.total);
      return rep;
    }
    ++ia;
    ++ib;
  }
  return rep;
}

// Re-keys a distribution onto the coordinates [block*n, (block+blocks)*n).
inline ExactDistribution project_block(const ExactDistribution& d, std::size_t n,
                                       std::size_t block, std::size_t blocks = 1) {
  ExactDistribution out;
  out.total = d.total;
  out.rejected = d.rejected;
  for (const auto& [coords, count] : d.counts) {
    std::vector<u64> key(coords.begin() + static_cast<std::ptrdiff_t>(block * n),
                         coords.begin() + static_cast<std::ptrdiff_t>((block + blocks) * n));
    out.counts[std::move(key)] += count;
  }
  return out;
}

// Re-keys onto the scalar <A, B> computed from the views.
inline ExactDistribution project_alpha(const ExactDistribution& d, const FieldParams& params) {
  ExactDistribution out;
  out.total = d.total;
  out.rejected = d.rejected;
  const std::size_t n = params.n;
  for (const auto& [coords, count] : d.counts) {
    u64 acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const u64 a = coords[outcome_block::vl_a * n + i];
      const u64 b = coords[outcome_block::vr_b * n + i];
      acc = static_cast<u64>((acc + static_cast<u128>(a) * b) % params.p);
    }
    out.counts[std::vector<u64>{acc}] += count;
  }
  return out;
}

// The marginals compared alongside the joint distribution. Names are stable
// identifiers used in reports.
inline std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>
marginal_blocks() {
  return {
      {"new_encoding", {outcome_block::l_new, 2}},
      {"A", {outcome_block::vl_a, 1}},
      {"B", {outcome_block::vr_b, 1}},
      {"V", {outcome_block::vl_v, 1}},
      {"V_tilde", {outcome_block::vl_v_tilde, 1}},
  };
}

struct ExperimentComparison {
  DistributionEqualityReport joint;
  std::vector<std::pair<std::string, DistributionEqualityReport>> marginals;
  u64 refresh_rejected = 0;

  bool all_equal() const {
    if (!joint.equal) return false;
    for (const auto& [name, rep] : marginals)
      if (!rep.equal) return false;
    return true;
  }
};

// Full exact comparison of the two experiments on one input encoding: the
// joint outcome distribution plus the named marginals (and <A,B>).
inline ExperimentComparison compare_experiment_distributions(const Encoding& enc) {
  ExactDistribution protocol = exact_distribution_refresh(enc);
  ExactDistribution simulation = exact_distribution_reconstruct(enc);
  ExperimentComparison cmp;
  cmp.joint = compare_exact(protocol, simulation);
  cmp.refresh_rejected = protocol.rejected;
  const std::size_t n = enc.params.n;
  for (const auto& [name, span] : marginal_blocks()) {
    cmp.marginals.emplace_back(
        name, compare_exact(project_block(protocol, n, span.first, span.second),
                            project_block(simulation, n, span.first, span.second)));
  }
  cmp.marginals.emplace_back("alpha", compare_exact(project_alpha(protocol, enc.params),
                                                    project_alpha(simulation, enc.params)));
  return cmp;
}

// ---------------------------------------------------------------------------
// Monte Carlo comparison for instances too large to enumerate.
// ---------------------------------------------------------------------------

// One compared statistic. The yardstick for "close" is the same-distribution
// baseline measured in the same run: two independent protocol sample sets of
// the same size give null_tv, and the protocol-vs-simulation distance must
// stay below factor * null_tv.
struct McStatistic {
  std::string name;
  double null_tv = 0;
  double stat_tv = 0;
  std::size_t null_support = 0;
  std::size_t stat_support = 0;

  bool within(double factor) const {
    if (stat_tv == 0) return true;
    return null_tv > 0 && stat_tv < factor * null_tv;
  }
};

struct McComparison {
  std::size_t trials = 0;
  std::vector<McStatistic> stats;  // joint first, then marginals

  bool within(double factor = 3.0) const {
    for (const auto& s : stats)
      if (!s.within(factor)) return false;
    return true;
  }
};

namespace detail {

// Number of distinct keys and L1 distance between two equal-size multisets,
// as total-variation distance of their empirical distributions.
inline std::pair<double, std::size_t> tv_from_samples(std::vector<u128>& a, std::vector<u128>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double tv = 0;
  std::size_t support = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    u128 key;
    if (j >= b.size() || (i < a.size() && a[i] < b[j]))
      key = a[i];
    else
      key = b[j];
    std::size_t ca = 0, cb = 0;
    while (i < a.size() && a[i] == key) {
      ++ca;
      ++i;
    }
    while (j < b.size() && b[j] == key) {
      ++cb;
      ++j;
    }
    tv += std::abs(static_cast<double>(ca) / na - static_cast<double>(cb) / nb);
    ++support;
  }
  return {tv / 2.0, support};
}

struct McMarginalSpec {
  std::string name;
  std::size_t offset;  // in coordinates
  std::size_t len;     // in coordinates; 0 means the derived <A,B> scalar
};

inline std::vector<McMarginalSpec> mc_marginal_specs(std::size_t n) {
  std::vector<McMarginalSpec> specs;
  for (const auto& [name, span] : marginal_blocks())
    specs.push_back({name, span.first * n, span.second * n});
  specs.push_back({"alpha", 0, 0});
  return specs;
}

// Per-thread accumulator: one packed-sample vector per sample set for the
// joint statistic, one histogram per (set, marginal).
struct McAccum {
  std::array<std::vector<u128>, 4> joint;
  std::array<std::vector<std::map<u128, u64>>, 4> marginals;
};

}  // namespace detail

// Draws `trials` independent samples of each of four sets — three from the
// protocol experiment (two forming the same-distribution baseline), one from
// the simulation — and compares the joint outcome plus each marginal.
// Deterministic for a given seed under any thread count: every sample uses a
// stream derived from its own index.
inline McComparison mc_compare_experiments(const Encoding& enc, std::size_t trials,
                                           const SeededRng& rng, std::size_t threads = 1) {
  const FieldParams& params = enc.params;
  const u64 p = params.p;
  const std::size_t n = params.n;
  // Fail fast if outcomes cannot be packed.
  {
    std::vector<u64> probe(outcome_block::count * n, 0);
    pack_coords(probe, p);
  }
  const auto specs = detail::mc_marginal_specs(n);
  const std::array<const char*, 4> stream_names = {"mc/x1", "mc/x2", "mc/x3", "mc/y"};

  const std::size_t num_threads = threads < 1 ? 1 : threads;
  std::vector<detail::McAccum> accums(num_threads < 2 ? 1 : num_threads);
  for (auto& acc : accums)
    for (auto& m : acc.marginals) m.resize(specs.size());

  detail::run_partitioned(
      trials, num_threads, [&](std::size_t thread_idx, u64 begin, u64 end) {
        detail::McAccum& acc = accums[thread_idx];
        RandomOracleSampler oracle;
        for (u64 i = begin; i < end; ++i) {
          for (std::size_t set = 0; set < 4; ++set) {
            SeededRng stream = rng.derive(stream_names[set], i);
            ExperimentOutcome outcome =
                set < 3 ? run_refresh_experiment(enc, oracle, stream)
                        : run_reconstruct_refresh_experiment(enc, stream);
            const std::vector<u64> coords = canonical_coords(outcome);
            acc.joint[set].push_back(pack_coords(coords, p));
            for (std::size_t m = 0; m < specs.size(); ++m) {
              u128 key;
              if (specs[m].len == 0) {
                u64 alpha = 0;
                for (std::size_t k = 0; k < n; ++k) {
                  const u64 a = coords[outcome_block::vl_a * n + k];
                  const u64 b = coords[outcome_block::vr_b * n + k];
                  alpha = static_cast<u64>((alpha + static_cast<u128>(a) * b) % p);
                }
                key = alpha;
              } else {
                std::vector<u64> sub(coords.begin() + static_cast<std::ptrdiff_t>(specs[m].offset),
                                     coords.begin() +
                                         static_cast<std::ptrdiff_t>(specs[m].offset + specs[m].len));
                key = pack_coords(sub, p);
              }
              ++acc.marginals[set][m][key];
            }
          }
        }
      });

  // Merge thread-local accumulators.
  detail::McAccum merged;
  for (auto& m : merged.marginals) m.resize(specs.size());
  for (auto& acc : accums) {
    for (std::size_t set = 0; set < 4; ++set) {
      merged.joint[set].insert(merged.joint[set].end(), acc.joint[set].begin(),
                               acc.joint[set].end());
      for (std::size_t m = 0; m < specs.size(); ++m)
        for (const auto& [k, v] : acc.marginals[set][m]) merged.marginals[set][m][k] += v;
    }
  }

  McComparison cmp;
  cmp.trials = trials;
  {
    McStatistic joint;
    joint.name = "joint";
    auto [null_tv, null_support] = detail::tv_from_samples(merged.joint[0], merged.joint[1]);
    auto [stat_tv, stat_support] = detail::tv_from_samples(merged.joint[2], merged.joint[3]);
    joint.null_tv = null_tv;
    joint.null_support = null_support;
    joint.stat_tv = stat_tv;
    joint.stat_support = stat_support;
    cmp.stats.push_back(std::move(joint));
  }
  for (std::size_t m = 0; m < specs.size(); ++m) {
    McStatistic st;
    st.name = specs[m].name;
    st.null_tv = tv_distance(merged.marginals[0][m], merged.marginals[1][m]);
    st.stat_tv = tv_distance(merged.marginals[2][m], merged.marginals[3][m]);
    std::map<u128, u64> null_union = merged.marginals[0][m];
    for (const auto& [k, v] : merged.marginals[1][m]) null_union[k] += v;
    std::map<u128, u64> stat_union = merged.marginals[2][m];
    for (const auto& [k, v] : merged.marginals[3][m]) stat_union[k] += v;
    st.null_support = null_union.size();
    st.stat_support = stat_union.size();
    cmp.stats.push_back(std::move(st));
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Restart-rate estimation.
// ---------------------------------------------------------------------------

struct RestartRateReport {
  u64 p = 0;
  std::size_t n = 0;
  u64 runs = 0;
  u64 attempts = 0;
  u64 restarts = 0;

  double rate() const { return attempts ? static_cast<double>(restarts) / static_cast<double>(attempts) : 0.0; }
  double bound() const { return 2.0 * static_cast<double>(n) / static_cast<double>(p); }
  WilsonInterval interval(double z = 1.96) const { return wilson_interval(restarts, attempts, z); }
};

// Runs `runs` full refreshes on independently drawn share pairs and tallies
// per-attempt restarts. Each attempt restarts independently, so
// restarts/attempts estimates the per-attempt restart probability, which is
// bounded by 2n/p.
inline RestartRateReport estimate_restart_rate(const FieldParams& params, u64 runs,
                                               const SeededRng& rng, std::size_t threads = 1) {
  RestartRateReport rep;
  rep.p = params.p;
  rep.n = params.n;
  rep.runs = runs;
  const std::size_t num_threads = threads < 1 ? 1 : threads;
  std::vector<std::pair<u64, u64>> partial(num_threads < 2 ? 1 : num_threads, {0, 0});
  detail::run_partitioned(runs, num_threads, [&](std::size_t thread_idx, u64 begin, u64 end) {
    Field f(params);
    RandomOracleSampler oracle;
    auto& [attempts, restarts] = partial[thread_idx];
    for (u64 i = begin; i < end; ++i) {
      SeededRng stream = rng.derive("restart-rate", i);
      Encoding enc{f.sample_nonzero_vector(stream), f.sample_nonzero_vector(stream), params};
      Channel channel;
      RefreshTrace trace = refresh(enc, oracle, channel, stream);
      attempts += trace.restarts + 1;
      restarts += trace.restarts;
    }
  });
  for (const auto& [attempts, restarts] : partial) {
    rep.attempts += attempts;
    rep.restarts += restarts;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Operation-count scaling.
// ---------------------------------------------------------------------------

struct ScalingPoint {
  std::size_t n = 0;
  u64 trials = 0;
  u64 attempts = 0;
  u64 min_attempt_ops = 0;
  u64 max_attempt_ops = 0;
  double mean_attempt_ops = 0;
  u64 budget = 0;  // 8n: 2n inversions + 4n multiplications + 2n additions

  bool within_budget() const { return max_attempt_ops <= budget; }
};

struct ScalingReport {
  u64 p = 0;
  std::vector<ScalingPoint> points;
  std::vector<double> ratios;  // mean ops ratio between consecutive dimensions
  LinearFit fit{0, 0, 0};      // mean attempt ops as a function of n
};

// Measures per-attempt operation counts of the protocol across dimensions.
// Counts cover only the two parties' computations; oracle sampling is outside
// the counting scope.
inline ScalingReport measure_scaling(u64 p, const std::vector<std::size_t>& dims, u64 trials,
                                     const SeededRng& rng, std::size_t threads = 1) {
  ScalingReport rep;
  rep.p = p;
  const std::size_t num_threads = threads < 1 ? 1 : threads;
  for (std::size_t n : dims) {
    FieldParams params(p, n);
    struct Partial {
      u64 attempts = 0;
      u64 ops_sum = 0;
      u64 ops_min = ~0ULL;
      u64 ops_max = 0;
    };
    std::vector<Partial> partial(num_threads < 2 ? 1 : num_threads);
    detail::run_partitioned(trials, num_threads, [&](std::size_t thread_idx, u64 begin, u64 end) {
      Field f(params);
      RandomOracleSampler oracle;
      Partial& acc = partial[thread_idx];
      for (u64 i = begin; i < end; ++i) {
        SeededRng stream = rng.derive("scaling", i).derive("n", n);
        Encoding enc{f.sample_nonzero_vector(stream), f.sample_nonzero_vector(stream), params};
        Channel channel;
        RefreshTrace trace = refresh(enc, oracle, channel, stream);
        for (const OpCounter& ops : trace.attempt_ops) {
          const u64 total = ops.total();
          ++acc.attempts;
          acc.ops_sum += total;
          acc.ops_min = std::min(acc.ops_min, total);
          acc.ops_max = std::max(acc.ops_max, total);
        }
      }
    });
    ScalingPoint point;
    point.n = n;
    point.trials = trials;
    point.budget = 8 * static_cast<u64>(n);
    u64 ops_sum = 0;
    point.min_attempt_ops = ~0ULL;
    for (const Partial& acc : partial) {
      point.attempts += acc.attempts;
      ops_sum += acc.ops_sum;
      point.min_attempt_ops = std::min(point.min_attempt_ops, acc.ops_min);
      point.max_attempt_ops = std::max(point.max_attempt_ops, acc.ops_max);
    }
    point.mean_attempt_ops =
        point.attempts ? static_cast<double>(ops_sum) / static_cast<double>(point.attempts) : 0.0;
    rep.points.push_back(point);
  }
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i)
    rep.ratios.push_back(rep.points[i + 1].mean_attempt_ops / rep.points[i].mean_attempt_ops);
  if (rep.points.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& pt : rep.points) {
      xs.push_back(static_cast<double>(pt.n));
      ys.push_back(pt.mean_attempt_ops);
    }
    rep.fit = fit_line(xs, ys);
  }
  return rep;
}

}  // namespace lrs
