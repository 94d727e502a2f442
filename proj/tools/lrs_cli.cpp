// Command-line front end: encode/decode secrets, run the refresh protocol,
// reconstruct views, compare the two experiment distributions, estimate
// restart rates, measure operation scaling, and play the leakage game.
//
// Exit codes: 0 success, 1 check failure, 2 usage/input error, 3 refusal
// (enumeration too large or restart cap exceeded).
//
// All artifacts (vector files, views files, JSON summaries, stdout reports)
// are byte-deterministic functions of the inputs and the seed; no timestamps
// or machine-dependent values are ever emitted.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrs/lrs.hpp"

using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

lrs::u64 parse_env_u64(const char* name, lrs::u64 fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || end == raw || *end != '\0')
    throw lrs::ConfigError(std::string(name) + " must be an unsigned integer, got '" + raw + "'");
  return v;
}

lrs::FieldMode resolve_mode(const std::string& mode, lrs::u64 p, std::size_t n) {
  if (mode == "auto")
    return p >= 4 * static_cast<lrs::u64>(n) ? lrs::FieldMode::standard : lrs::FieldMode::relaxed;
  return lrs::field_mode_from_string(mode);
}

lrs::VectorFile load_vector_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lrs::Error("cannot open '" + path + "' for reading");
  return lrs::read_vector(in);
}

lrs::Encoding load_encoding(const std::string& l_path, const std::string& r_path,
                            const std::string& mode) {
  lrs::VectorFile lf = load_vector_file(l_path);
  lrs::VectorFile rf = load_vector_file(r_path);
  if (lf.p != rf.p || lf.n != rf.n)
    throw lrs::ConfigError("share files disagree: '" + l_path + "' has p=" + std::to_string(lf.p) +
                           ", n=" + std::to_string(lf.n) + " but '" + r_path + "' has p=" +
                           std::to_string(rf.p) + ", n=" + std::to_string(rf.n));
  lrs::FieldParams params(lf.p, lf.n, resolve_mode(mode, lf.p, lf.n));
  return lrs::Encoding{lrs::NonZeroVector(lf.vec), lrs::NonZeroVector(rf.vec), params};
}

void save_vector_file(const std::string& path, const lrs::FieldVector& v, lrs::u64 p) {
  std::ostringstream os;
  lrs::write_vector(os, v, p);
  lrs::write_text_file(path, os.str());
}

// One report, two renderings: flat key=value lines on stdout and, when
// requested, pretty JSON in a summary file. Both come from the same object.
void emit_report(const ordered_json& j, const std::string& summary_path) {
  for (const auto& [key, value] : j.items()) {
    std::cout << key << "=";
    if (value.is_string())
      std::cout << value.get<std::string>();
    else if (value.is_boolean())
      std::cout << (value.get<bool>() ? "1" : "0");
    else
      std::cout << value.dump();
    std::cout << "\n";
  }
  if (!summary_path.empty()) lrs::write_text_file(summary_path, j.dump(2) + "\n");
}

// spec: `kind:part:args` terms joined by '/'. Kinds:
//   bit-select:<part>:<pos>,<pos>,...   selected bit positions
//   parity:<part>:<pos>,<pos>,...       parity of the selected positions
//   proj:<part>:<coord>:<bits>          first <bits> bits of one coordinate
std::vector<lrs::LeakageQuery> parse_adversary_spec(const std::string& spec, lrs::u64 p) {
  std::vector<lrs::LeakageQuery> queries;
  std::stringstream terms(spec);
  std::string term;
  while (std::getline(terms, term, '/')) {
    if (term.empty()) throw lrs::ConfigError("empty adversary term in '" + spec + "'");
    std::vector<std::string> fields;
    std::stringstream fs(term);
    std::string field;
    while (std::getline(fs, field, ':')) fields.push_back(field);
    auto parse_num = [&](const std::string& s) -> std::size_t {
      char* end = nullptr;
      errno = 0;
      unsigned long long v = std::strtoull(s.c_str(), &end, 10);
      if (errno != 0 || end == s.c_str() || *end != '\0')
        throw lrs::ConfigError("expected a number in adversary term '" + term + "', got '" + s +
                               "'");
      return static_cast<std::size_t>(v);
    };
    auto parse_positions = [&](const std::string& s) {
      std::vector<std::size_t> out;
      std::stringstream ps(s);
      std::string item;
      while (std::getline(ps, item, ',')) out.push_back(parse_num(item));
      if (out.empty())
        throw lrs::ConfigError("adversary term '" + term + "' has no positions");
      return out;
    };
    if (fields.size() < 2) throw lrs::ConfigError("malformed adversary term '" + term + "'");
    const std::string& kind = fields[0];
    const std::size_t part = parse_num(fields[1]);
    if (kind == "bit-select") {
      if (fields.size() != 3) throw lrs::ConfigError("bit-select needs 3 fields: '" + term + "'");
      queries.push_back({part, lrs::BitSelection{parse_positions(fields[2])}});
    } else if (kind == "parity") {
      if (fields.size() != 3) throw lrs::ConfigError("parity needs 3 fields: '" + term + "'");
      queries.push_back({part, lrs::ParityOfSubset{parse_positions(fields[2])}});
    } else if (kind == "proj") {
      if (fields.size() != 4) throw lrs::ConfigError("proj needs 4 fields: '" + term + "'");
      queries.push_back(
          {part, lrs::TruncatedFieldProjection{parse_num(fields[2]), parse_num(fields[3]), p}});
    } else {
      throw lrs::ConfigError("unknown adversary kind '" + kind +
                             "' (expected bit-select, parity, or proj)");
    }
  }
  if (queries.empty()) throw lrs::ConfigError("adversary spec '" + spec + "' has no terms");
  return queries;
}

// ---------------------------------------------------------------------------
// Option bundles.
// ---------------------------------------------------------------------------

struct Defaults {
  lrs::u64 seed = 0;
  std::size_t threads = 1;
};

struct EncodeOpts {
  lrs::u64 p = 0;
  std::size_t n = 0;
  lrs::u64 secret = 0;
  std::string field_mode = "auto";
  std::string encode_mode = "rejection";
  lrs::u64 seed = 0;
  std::string out_l, out_r, summary;
};

struct DecodeOpts {
  std::string l, r;
  std::string field_mode = "auto";
  std::string summary;
};

struct RefreshOpts {
  std::string l, r;
  std::string force_oracle;
  std::string field_mode = "auto";
  lrs::u64 seed = 0;
  std::size_t restart_cap = 1000;
  std::string out_l, out_r, views, summary;
};

struct ReconstructOpts {
  std::string old_l, old_r, new_l, new_r;
  std::string field_mode = "auto";
  lrs::u64 seed = 0;
  std::string views, summary;
};

struct DistCheckOpts {
  lrs::u64 p = 0;
  std::size_t n = 0;
  std::optional<lrs::u64> secret;
  std::string l, r;
  std::string field_mode = "auto";
  bool exhaustive_inputs = false;
  std::size_t mc_trials = 0;
  lrs::u64 seed = 0;
  std::size_t threads = 1;
  std::string summary;
};

struct RestartOpts {
  lrs::u64 p = 0;
  std::size_t n = 0;
  lrs::u64 runs = 100000;
  std::string field_mode = "auto";
  lrs::u64 seed = 0;
  std::size_t threads = 1;
  std::string summary;
};

struct BenchOpts {
  lrs::u64 p = 65537;
  std::vector<std::size_t> dims = {64, 128, 256};
  lrs::u64 trials = 1000;
  lrs::u64 seed = 0;
  std::size_t threads = 1;
  std::string summary;
};

struct GameOpts {
  lrs::u64 p = 0;
  std::size_t n = 0;
  lrs::u64 secret = 1;
  std::string field_mode = "auto";
  std::string encode_mode = "constructive";
  lrs::u64 seed = 0;
  std::optional<std::size_t> lambda;
  std::string adversary;
  std::string log, summary;
};

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

int cmd_encode(const EncodeOpts& o) {
  lrs::FieldParams params(o.p, o.n, resolve_mode(o.field_mode, o.p, o.n));
  if (o.secret >= o.p)
    throw lrs::ConfigError("secret " + std::to_string(o.secret) + " is not a residue mod " +
                           std::to_string(o.p));
  lrs::SeededRng rng(o.seed, "encode");
  lrs::Encoding enc = lrs::encode({o.secret, o.p}, params, rng,
                                  lrs::encode_mode_from_string(o.encode_mode));
  save_vector_file(o.out_l, enc.L.vec(), o.p);
  save_vector_file(o.out_r, enc.R.vec(), o.p);

  ordered_json j;
  j["command"] = "encode";
  j["p"] = o.p;
  j["n"] = o.n;
  j["field_mode"] = lrs::to_string(params.mode);
  j["encode_mode"] = o.encode_mode;
  j["seed"] = o.seed;
  j["secret"] = o.secret;
  j["decode_check"] = lrs::decode(enc).value == o.secret;
  emit_report(j, o.summary);
  return lrs::decode(enc).value == o.secret ? 0 : 1;
}

int cmd_decode(const DecodeOpts& o) {
  lrs::Encoding enc = load_encoding(o.l, o.r, o.field_mode);
  ordered_json j;
  j["command"] = "decode";
  j["p"] = enc.params.p;
  j["n"] = enc.params.n;
  j["field_mode"] = lrs::to_string(enc.params.mode);
  j["secret"] = lrs::decode(enc).value;
  emit_report(j, o.summary);
  return 0;
}

int cmd_refresh(const RefreshOpts& o) {
  lrs::Encoding enc = load_encoding(o.l, o.r, o.field_mode);
  const lrs::FieldParams& params = enc.params;

  std::unique_ptr<lrs::OracleSampler> oracle;
  if (o.force_oracle.empty()) {
    oracle = std::make_unique<lrs::RandomOracleSampler>();
  } else {
    std::ifstream in(o.force_oracle, std::ios::binary);
    if (!in) throw lrs::Error("cannot open '" + o.force_oracle + "' for reading");
    lrs::OracleSample sample = lrs::read_oracle_sample(in, params);
    oracle = std::make_unique<lrs::ScriptedOracleSampler>(
        std::deque<lrs::OracleSample>{std::move(sample)});
  }

  lrs::SeededRng rng(o.seed, "refresh");
  lrs::Channel channel;
  lrs::RefreshOptions opts;
  opts.restart_cap = o.restart_cap;
  lrs::RefreshTrace trace = [&] {
    try {
      return lrs::refresh(enc, *oracle, channel, rng, opts);
    } catch (const lrs::OracleExhaustedError&) {
      throw lrs::PreconditionError(
          "the forced oracle sample leads to a restart; this input/oracle combination has no "
          "accepting run");
    }
  }();

  if (!o.out_l.empty()) save_vector_file(o.out_l, trace.output.L.vec(), params.p);
  if (!o.out_r.empty()) save_vector_file(o.out_r, trace.output.R.vec(), params.p);
  if (!o.views.empty()) {
    std::ostringstream os;
    lrs::write_views(os, lrs::views_record_from_trace(trace));
    lrs::write_text_file(o.views, os.str());
  }

  const bool preserved = lrs::decode(trace.output) == lrs::decode(enc);
  const bool views_valid = lrs::verify_views(trace, enc);
  const lrs::OpCounter& ops = trace.op_count();
  const lrs::u64 budget = 8 * static_cast<lrs::u64>(params.n);

  ordered_json j;
  j["command"] = "refresh";
  j["p"] = params.p;
  j["n"] = params.n;
  j["field_mode"] = lrs::to_string(params.mode);
  j["seed"] = o.seed;
  j["forced_oracle"] = !o.force_oracle.empty();
  j["restarts"] = trace.restarts;
  j["messages"] = trace.messages.size();
  j["alpha"] = trace.alpha.value;
  j["ops_adds"] = ops.adds;
  j["ops_muls"] = ops.muls;
  j["ops_invs"] = ops.invs;
  j["ops_total"] = ops.total();
  j["ops_budget"] = budget;
  j["within_budget"] = ops.total() <= budget;
  j["preserved"] = preserved;
  j["views_valid"] = views_valid;
  emit_report(j, o.summary);
  return preserved && views_valid && ops.total() <= budget ? 0 : 1;
}

int cmd_reconstruct(const ReconstructOpts& o) {
  lrs::Encoding old_enc = load_encoding(o.old_l, o.old_r, o.field_mode);
  lrs::Encoding new_enc = load_encoding(o.new_l, o.new_r, o.field_mode);
  lrs::SeededRng rng(o.seed, "reconstruct");
  lrs::CommonRandomness cr = lrs::sample_common_randomness(old_enc.params, rng);
  auto views = lrs::reconstruct(old_enc, new_enc, cr);
  const bool constraints_ok = lrs::check_reconstruction_constraints(views.first, views.second);

  if (!o.views.empty()) {
    std::ostringstream os;
    lrs::write_views(os, lrs::views_record_from_reconstruction(views.first, views.second, new_enc));
    lrs::write_text_file(o.views, os.str());
  }

  lrs::Field f(old_enc.params);
  ordered_json j;
  j["command"] = "reconstruct";
  j["p"] = old_enc.params.p;
  j["n"] = old_enc.params.n;
  j["field_mode"] = lrs::to_string(old_enc.params.mode);
  j["seed"] = o.seed;
  j["messages"] = 0;
  j["alpha"] = f.inner_product(views.first.A.vec(), views.second.B).value;
  j["constraints_ok"] = constraints_ok;
  emit_report(j, o.summary);
  return constraints_ok ? 0 : 1;
}

void append_comparison(ordered_json& j, const std::string& prefix,
                       const lrs::ExperimentComparison& cmp) {
  j[prefix + "joint_equal"] = cmp.joint.equal;
  j[prefix + "support"] = cmp.joint.support_a;
  j[prefix + "protocol_total"] = cmp.joint.total_a;
  j[prefix + "simulation_total"] = cmp.joint.total_b;
  j[prefix + "protocol_rejected"] = cmp.refresh_rejected;
  for (const auto& [name, rep] : cmp.marginals) j[prefix + "marginal." + name] = rep.equal;
  if (!cmp.joint.equal) j[prefix + "mismatch"] = cmp.joint.mismatch;
}

int cmd_dist_check(const DistCheckOpts& o) {
  if (!o.l.empty() != !o.r.empty())
    throw lrs::ConfigError("--l and --r must be given together");
  const bool from_files = !o.l.empty();
  if (o.exhaustive_inputs && (from_files || o.secret))
    throw lrs::ConfigError("--exhaustive-inputs replaces --secret/--l/--r");
  if (o.exhaustive_inputs && o.mc_trials)
    throw lrs::ConfigError("--exhaustive-inputs and --mc are mutually exclusive");

  ordered_json j;
  j["command"] = "compare-dist";

  if (o.exhaustive_inputs) {
    lrs::FieldParams params(o.p, o.n, resolve_mode(o.field_mode, o.p, o.n));
    j["method"] = "exact-exhaustive";
    j["p"] = params.p;
    j["n"] = params.n;
    j["field_mode"] = lrs::to_string(params.mode);
    // Every share pair with nonzero coordinates is a valid input.
    lrs::Field f(params);
    std::vector<lrs::u64> lo(2 * params.n, 1), hi(2 * params.n, params.p - 1), d = lo;
    lrs::u64 inputs = 0, failures = 0;
    do {
      std::vector<lrs::u64> lv(d.begin(), d.begin() + params.n);
      std::vector<lrs::u64> rv(d.begin() + params.n, d.end());
      lrs::Encoding enc{lrs::NonZeroVector(f.vector_from(lv)), lrs::NonZeroVector(f.vector_from(rv)),
                        params};
      lrs::ExperimentComparison cmp = lrs::compare_experiment_distributions(enc);
      ++inputs;
      if (!cmp.all_equal()) {
        ++failures;
        if (failures == 1) {
          append_comparison(j, "first_failure.", cmp);
        }
      }
    } while (lrs::detail::advance_odometer(d, lo, hi));
    j["inputs"] = inputs;
    j["failures"] = failures;
    j["all_equal"] = failures == 0;
    emit_report(j, o.summary);
    return failures == 0 ? 0 : 1;
  }

  lrs::Encoding enc = [&] {
    if (from_files) return load_encoding(o.l, o.r, o.field_mode);
    lrs::FieldParams params(o.p, o.n, resolve_mode(o.field_mode, o.p, o.n));
    const lrs::u64 secret = o.secret.value_or(1);
    if (secret >= params.p)
      throw lrs::ConfigError("secret " + std::to_string(secret) + " is not a residue mod " +
                             std::to_string(params.p));
    lrs::SeededRng rng(o.seed, "dist-input");
    return lrs::encode({secret, params.p}, params, rng);
  }();
  j["p"] = enc.params.p;
  j["n"] = enc.params.n;
  j["field_mode"] = lrs::to_string(enc.params.mode);
  j["secret"] = lrs::decode(enc).value;

  if (o.mc_trials > 0) {
    j["method"] = "mc";
    j["trials"] = o.mc_trials;
    j["seed"] = o.seed;
    lrs::SeededRng rng(o.seed, "dist-mc");
    lrs::McComparison cmp = lrs::mc_compare_experiments(enc, o.mc_trials, rng, o.threads);
    for (const auto& st : cmp.stats) {
      j["stat." + st.name + ".null_tv"] = st.null_tv;
      j["stat." + st.name + ".stat_tv"] = st.stat_tv;
      j["stat." + st.name + ".pass"] = st.within(3.0);
    }
    j["pass"] = cmp.within(3.0);
    emit_report(j, o.summary);
    return cmp.within(3.0) ? 0 : 1;
  }

  j["method"] = "exact";
  lrs::ExperimentComparison cmp = lrs::compare_experiment_distributions(enc);
  append_comparison(j, "", cmp);
  j["all_equal"] = cmp.all_equal();
  emit_report(j, o.summary);
  return cmp.all_equal() ? 0 : 1;
}

int cmd_restart_rate(const RestartOpts& o) {
  lrs::FieldParams params(o.p, o.n, resolve_mode(o.field_mode, o.p, o.n));
  lrs::SeededRng rng(o.seed, "restart-rate");
  lrs::RestartRateReport rep = lrs::estimate_restart_rate(params, o.runs, rng, o.threads);
  lrs::WilsonInterval wi = rep.interval();
  const double threshold = rep.bound() + 3 * wi.half_width;
  const bool pass = rep.rate() <= threshold && rep.rate() <= 0.5 + 3 * wi.half_width;

  ordered_json j;
  j["command"] = "restart-rate";
  j["p"] = rep.p;
  j["n"] = rep.n;
  j["seed"] = o.seed;
  j["runs"] = rep.runs;
  j["attempts"] = rep.attempts;
  j["restarts"] = rep.restarts;
  j["rate"] = rep.rate();
  j["bound"] = rep.bound();
  j["wilson_low"] = wi.low();
  j["wilson_high"] = wi.high();
  j["threshold"] = threshold;
  j["pass"] = pass;
  emit_report(j, o.summary);
  return pass ? 0 : 1;
}

int cmd_bench(const BenchOpts& o) {
  lrs::SeededRng rng(o.seed, "bench");
  lrs::ScalingReport rep = lrs::measure_scaling(o.p, o.dims, o.trials, rng, o.threads);

  ordered_json j;
  j["command"] = "bench";
  j["p"] = o.p;
  j["seed"] = o.seed;
  j["trials"] = o.trials;
  bool within = true;
  for (const auto& pt : rep.points) {
    const std::string k = "point." + std::to_string(pt.n) + ".";
    j[k + "attempts"] = pt.attempts;
    j[k + "mean_ops"] = pt.mean_attempt_ops;
    j[k + "max_ops"] = pt.max_attempt_ops;
    j[k + "budget"] = pt.budget;
    j[k + "within_budget"] = pt.within_budget();
    within = within && pt.within_budget();
  }
  bool ratios_ok = true;
  for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
    const std::string k = "ratio." + std::to_string(rep.points[i + 1].n) + "_over_" +
                          std::to_string(rep.points[i].n);
    j[k] = rep.ratios[i];
    ratios_ok = ratios_ok && rep.ratios[i] >= 1.7 && rep.ratios[i] <= 2.3;
  }
  j["fit_slope"] = rep.fit.slope;
  j["fit_intercept"] = rep.fit.intercept;
  j["fit_r2"] = rep.fit.r_squared;
  j["pass"] = within && ratios_ok;
  emit_report(j, o.summary);
  return within && ratios_ok ? 0 : 1;
}

int cmd_game(const GameOpts& o) {
  lrs::FieldParams params(o.p, o.n, resolve_mode(o.field_mode, o.p, o.n));
  if (o.secret >= o.p)
    throw lrs::ConfigError("secret " + std::to_string(o.secret) + " is not a residue mod " +
                           std::to_string(o.p));
  lrs::SeededRng rng(o.seed, "game");
  lrs::Encoding enc = lrs::encode({o.secret, o.p}, params, rng,
                                  lrs::encode_mode_from_string(o.encode_mode));
  lrs::MemoryParts mem = lrs::serialize_shares_to_memory(enc);
  const std::size_t lambda = o.lambda.value_or(lrs::default_lambda(params));

  std::vector<lrs::LeakageQuery> queries = parse_adversary_spec(o.adversary, params.p);
  lrs::ScriptedAdversary adversary(std::move(queries));
  lrs::GameResult result = lrs::run_game(mem, adversary, lambda);
  const bool audit_ok = lrs::audit_log(result.log, lambda, mem.count());

  if (!o.log.empty()) {
    std::ostringstream os;
    for (const auto& rec : result.log.records) os << rec.to_line() << "\n";
    lrs::write_text_file(o.log, os.str());
  }

  std::size_t refused = 0;
  for (const auto& rec : result.log.records) refused += rec.refused ? 1 : 0;

  ordered_json j;
  j["command"] = "game";
  j["p"] = params.p;
  j["n"] = params.n;
  j["field_mode"] = lrs::to_string(params.mode);
  j["seed"] = o.seed;
  j["secret"] = o.secret;
  j["lambda"] = lambda;
  j["parts"] = mem.count();
  j["part_bits"] = mem.part_bits();
  j["queries"] = result.log.records.size();
  j["refused"] = refused;
  j["aborted"] = result.aborted;
  j["output"] = lrs::bits_to_string(result.output);
  j["output_bits"] = result.output.size();
  for (std::size_t i = 0; i < result.final_budget.consumed.size(); ++i)
    j["consumed." + std::to_string(i + 1)] = result.final_budget.consumed[i];
  j["audit_ok"] = audit_ok;
  emit_report(j, o.summary);
  return audit_ok ? 0 : 1;
}

// Maps library errors onto the documented exit codes.
template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const lrs::RefusalError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const lrs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Defaults defaults;
  try {
    defaults.seed = parse_env_u64("LRS_SEED", 0);
    defaults.threads = static_cast<std::size_t>(parse_env_u64("LRS_THREADS", 1));
  } catch (const lrs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Leakage-resilient inner-product storage: refresh protocol and experiments"};
  app.require_subcommand(1);

  const std::vector<std::string> modes = {"auto", "standard", "relaxed"};
  const std::vector<std::string> encode_modes = {"rejection", "constructive"};

  EncodeOpts enc_o;
  enc_o.seed = defaults.seed;
  auto* enc_cmd = app.add_subcommand("encode", "Sample a fresh share pair for a secret");
  enc_cmd->add_option("--p", enc_o.p, "prime modulus")->required();
  enc_cmd->add_option("--n", enc_o.n, "vector dimension")->required();
  enc_cmd->add_option("--secret", enc_o.secret, "secret residue mod p")->required();
  enc_cmd->add_option("--field-mode", enc_o.field_mode)->check(CLI::IsMember(modes));
  enc_cmd->add_option("--encode-mode", enc_o.encode_mode)->check(CLI::IsMember(encode_modes));
  enc_cmd->add_option("--seed", enc_o.seed, "RNG seed (default from LRS_SEED, else 0)");
  enc_cmd->add_option("--out-l", enc_o.out_l, "output file for L")->required();
  enc_cmd->add_option("--out-r", enc_o.out_r, "output file for R")->required();
  enc_cmd->add_option("--summary", enc_o.summary, "JSON summary file");

  DecodeOpts dec_o;
  auto* dec_cmd = app.add_subcommand("decode", "Recover the secret from a share pair");
  dec_cmd->add_option("--l", dec_o.l, "L share file")->required();
  dec_cmd->add_option("--r", dec_o.r, "R share file")->required();
  dec_cmd->add_option("--field-mode", dec_o.field_mode)->check(CLI::IsMember(modes));
  dec_cmd->add_option("--summary", dec_o.summary, "JSON summary file");

  RefreshOpts ref_o;
  ref_o.seed = defaults.seed;
  auto* ref_cmd = app.add_subcommand("refresh", "Run the two-party refresh protocol");
  ref_cmd->add_option("--l", ref_o.l, "L share file")->required();
  ref_cmd->add_option("--r", ref_o.r, "R share file")->required();
  ref_cmd->add_option("--force-oracle", ref_o.force_oracle,
                      "use this oracle sample file instead of random sampling");
  ref_cmd->add_option("--field-mode", ref_o.field_mode)->check(CLI::IsMember(modes));
  ref_cmd->add_option("--seed", ref_o.seed, "RNG seed (default from LRS_SEED, else 0)");
  ref_cmd->add_option("--restart-cap", ref_o.restart_cap, "refuse after this many restarts");
  ref_cmd->add_option("--out-l", ref_o.out_l, "output file for refreshed L");
  ref_cmd->add_option("--out-r", ref_o.out_r, "output file for refreshed R");
  ref_cmd->add_option("--views", ref_o.views, "output file for both parties' views");
  ref_cmd->add_option("--summary", ref_o.summary, "JSON summary file");

  ReconstructOpts rec_o;
  rec_o.seed = defaults.seed;
  auto* rec_cmd =
      app.add_subcommand("reconstruct", "Reconstruct both views from old and new shares");
  rec_cmd->add_option("--old-l", rec_o.old_l, "old L share file")->required();
  rec_cmd->add_option("--old-r", rec_o.old_r, "old R share file")->required();
  rec_cmd->add_option("--new-l", rec_o.new_l, "new L share file")->required();
  rec_cmd->add_option("--new-r", rec_o.new_r, "new R share file")->required();
  rec_cmd->add_option("--field-mode", rec_o.field_mode)->check(CLI::IsMember(modes));
  rec_cmd->add_option("--seed", rec_o.seed, "RNG seed for the offline (V, V~)");
  rec_cmd->add_option("--views", rec_o.views, "output file for the reconstructed views");
  rec_cmd->add_option("--summary", rec_o.summary, "JSON summary file");

  DistCheckOpts dist_o;
  dist_o.seed = defaults.seed;
  dist_o.threads = defaults.threads;
  auto* dist_cmd = app.add_subcommand(
      "compare-dist", "Compare the protocol and simulation outcome distributions");
  dist_cmd->add_option("--p", dist_o.p, "prime modulus");
  dist_cmd->add_option("--n", dist_o.n, "vector dimension");
  auto* dist_secret = dist_cmd->add_option("--secret", dist_o.secret, "secret residue mod p");
  dist_cmd->add_option("--l", dist_o.l, "L share file (exact input)")->excludes(dist_secret);
  dist_cmd->add_option("--r", dist_o.r, "R share file (exact input)");
  dist_cmd->add_option("--field-mode", dist_o.field_mode)->check(CLI::IsMember(modes));
  dist_cmd->add_flag("--exhaustive-inputs", dist_o.exhaustive_inputs,
                     "verify every input share pair at (p, n)");
  dist_cmd->add_option("--mc", dist_o.mc_trials,
                       "Monte Carlo sample count (instead of exact enumeration)");
  dist_cmd->add_option("--seed", dist_o.seed, "RNG seed (input sampling and Monte Carlo)");
  dist_cmd->add_option("--threads", dist_o.threads, "worker threads (default from LRS_THREADS)");
  dist_cmd->add_option("--summary", dist_o.summary, "JSON summary file");

  RestartOpts rr_o;
  rr_o.seed = defaults.seed;
  rr_o.threads = defaults.threads;
  auto* rr_cmd = app.add_subcommand("restart-rate", "Estimate the per-attempt restart rate");
  rr_cmd->add_option("--p", rr_o.p, "prime modulus")->required();
  rr_cmd->add_option("--n", rr_o.n, "vector dimension")->required();
  rr_cmd->add_option("--runs", rr_o.runs, "number of refresh runs");
  rr_cmd->add_option("--field-mode", rr_o.field_mode)->check(CLI::IsMember(modes));
  rr_cmd->add_option("--seed", rr_o.seed, "RNG seed");
  rr_cmd->add_option("--threads", rr_o.threads, "worker threads (default from LRS_THREADS)");
  rr_cmd->add_option("--summary", rr_o.summary, "JSON summary file");

  BenchOpts ben_o;
  ben_o.seed = defaults.seed;
  ben_o.threads = defaults.threads;
  auto* ben_cmd = app.add_subcommand("bench", "Measure per-attempt operation-count scaling");
  ben_cmd->add_option("--p", ben_o.p, "prime modulus");
  ben_cmd->add_option("--dims", ben_o.dims, "dimensions to measure")->delimiter(',');
  ben_cmd->add_option("--trials", ben_o.trials, "refresh runs per dimension");
  ben_cmd->add_option("--seed", ben_o.seed, "RNG seed");
  ben_cmd->add_option("--threads", ben_o.threads, "worker threads (default from LRS_THREADS)");
  ben_cmd->add_option("--summary", ben_o.summary, "JSON summary file");

  GameOpts gam_o;
  gam_o.seed = defaults.seed;
  auto* gam_cmd = app.add_subcommand("game", "Play the bounded-leakage adversary game");
  gam_cmd->add_option("--p", gam_o.p, "prime modulus")->required();
  gam_cmd->add_option("--n", gam_o.n, "vector dimension")->required();
  gam_cmd->add_option("--secret", gam_o.secret, "secret residue mod p (default 1)");
  gam_cmd->add_option("--field-mode", gam_o.field_mode)->check(CLI::IsMember(modes));
  gam_cmd->add_option("--encode-mode", gam_o.encode_mode)->check(CLI::IsMember(encode_modes));
  gam_cmd->add_option("--seed", gam_o.seed, "RNG seed");
  gam_cmd->add_option("--lambda", gam_o.lambda,
                      "per-part bit budget (default floor(0.49 n log2 p - 1))");
  gam_cmd->add_option("--adversary", gam_o.adversary,
                      "query script: kind:part:args joined by '/'; kinds bit-select, parity, proj")
      ->required();
  gam_cmd->add_option("--log", gam_o.log, "query log output file");
  gam_cmd->add_option("--summary", gam_o.summary, "JSON summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (enc_cmd->parsed()) return run_guarded([&] { return cmd_encode(enc_o); });
  if (dec_cmd->parsed()) return run_guarded([&] { return cmd_decode(dec_o); });
  if (ref_cmd->parsed()) return run_guarded([&] { return cmd_refresh(ref_o); });
  if (rec_cmd->parsed()) return run_guarded([&] { return cmd_reconstruct(rec_o); });
  if (dist_cmd->parsed()) return run_guarded([&] { return cmd_dist_check(dist_o); });
  if (rr_cmd->parsed()) return run_guarded([&] { return cmd_restart_rate(rr_o); });
  if (ben_cmd->parsed()) return run_guarded([&] { return cmd_bench(ben_o); });
  if (gam_cmd->parsed()) return run_guarded([&] { return cmd_game(gam_o); });
  return 2;
}
