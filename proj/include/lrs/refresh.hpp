#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "lrs/channel.hpp"
#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/leakfree_oracle.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/rng.hpp"

namespace lrs {

// Everything P_L sees in one accepted protocol run: its share, the oracle
// vectors it received, the message it sent and the one it received.
struct ViewL {
  NonZeroVector L;
  NonZeroVector A;
  FieldVector V;
  FieldVector A_tilde;
  FieldVector V_tilde;

  friend bool operator==(const ViewL&, const ViewL&) = default;
};

struct ViewR {
  NonZeroVector R;
  FieldVector B;
  FieldVector V;
  NonZeroVector B_tilde;
  FieldVector V_tilde;

  friend bool operator==(const ViewR&, const ViewR&) = default;
};

// Full record of one refresh run: the refreshed shares, both parties' views of
// the accepting attempt, the accepting transcript, per-attempt operation
// counts, and the discarded transcripts of restarted attempts.
struct RefreshTrace {
  Encoding output;
  ViewL view_l;
  ViewR view_r;
  FieldElement alpha;  // <A,B> of the accepting attempt
  std::size_t restarts = 0;
  std::vector<ChannelMessage> messages;                      // accepting attempt only
  std::vector<std::vector<ChannelMessage>> failed_messages;  // one entry per restarted attempt
  std::vector<OpCounter> attempt_ops;                        // per attempt, failed then accepting

  const OpCounter& op_count() const { return attempt_ops.back(); }
  OpCounter op_count_total() const {
    OpCounter t;
    for (const auto& a : attempt_ops) t += a;
    return t;
  }
};

struct RefreshOptions {
  std::size_t restart_cap = 1000;
};

// The left party's per-attempt state machine. Party computations run in the
// counting scope passed at construction; the party state holds exactly the
// fields of its view.
class PartyL {
 public:
  PartyL(const NonZeroVector& share, Field& f) : L_(share), f_(f) {}

  void receive_oracle(NonZeroVector A, FieldVector A_tilde) {
    A_ = std::move(A);
    A_tilde_ = std::move(A_tilde);
  }

  // V_i := L_i^{-1} * A_i, sent to P_R.
  void send_masked_share(Channel& ch) {
    V_.coords.clear();
    V_.coords.reserve(f_.n());
    for (std::size_t i = 0; i < f_.n(); ++i)
      V_.coords.push_back(f_.mul(f_.inv(L_[i]), A_[i]));
    ch.send_to_r(V_);
  }

  // X~_i := V~_i * A~_i; L' := L + X~. Returns nullopt when L' hits a zero
  // coordinate and the attempt must be restarted.
  std::optional<NonZeroVector> receive_and_refresh(Channel& ch) {
    V_tilde_ = ch.recv_at_l();
    FieldVector X_tilde;
    X_tilde.coords.reserve(f_.n());
    for (std::size_t i = 0; i < f_.n(); ++i)
      X_tilde.coords.push_back(f_.mul(V_tilde_[i], A_tilde_[i]));
    FieldVector L_prime = f_.vec_add(L_.vec(), X_tilde);
    if (has_zero_coordinate(L_prime)) return std::nullopt;
    return NonZeroVector(std::move(L_prime));
  }

  ViewL view() const { return ViewL{L_, A_, V_, A_tilde_, V_tilde_}; }

 private:
  NonZeroVector L_;
  NonZeroVector A_;
  FieldVector A_tilde_;
  FieldVector V_;
  FieldVector V_tilde_;
  Field& f_;
};

class PartyR {
 public:
  PartyR(const NonZeroVector& share, Field& f) : R_(share), f_(f) {}

  void receive_oracle(FieldVector B, NonZeroVector B_tilde) {
    B_ = std::move(B);
    B_tilde_ = std::move(B_tilde);
  }

  // X_i := V_i * B_i; R' := R + X. Returns nullopt on a zero coordinate.
  std::optional<NonZeroVector> receive_and_refresh(Channel& ch) {
    V_ = ch.recv_at_r();
    FieldVector X;
    X.coords.reserve(f_.n());
    for (std::size_t i = 0; i < f_.n(); ++i) X.coords.push_back(f_.mul(V_[i], B_[i]));
    FieldVector R_prime = f_.vec_add(R_.vec(), X);
    if (has_zero_coordinate(R_prime)) return std::nullopt;
    return NonZeroVector(std::move(R_prime));
  }

  // V~_i := R'_i^{-1} * B~_i, sent to P_L.
  void send_masked_share(const NonZeroVector& R_prime, Channel& ch) {
    V_tilde_.coords.clear();
    V_tilde_.coords.reserve(f_.n());
    for (std::size_t i = 0; i < f_.n(); ++i)
      V_tilde_.coords.push_back(f_.mul(f_.inv(R_prime[i]), B_tilde_[i]));
    ch.send_to_l(V_tilde_);
  }

  ViewR view() const { return ViewR{R_, B_, V_, B_tilde_, V_tilde_}; }

 private:
  NonZeroVector R_;
  FieldVector B_;
  FieldVector V_;
  NonZeroVector B_tilde_;
  FieldVector V_tilde_;
  Field& f_;
};

// Runs the two-party refresh until an attempt produces shares with no zero
// coordinate. Each restart discards all per-attempt state, including the
// oracle sample and the partial transcript; the views describe only the
// accepting attempt. The channel must be idle and empty at entry. Per attempt
// the parties spend exactly 2n inversions, 4n multiplications and 2n
// additions; oracle sampling is outside the counting scope.
inline RefreshTrace refresh(const Encoding& enc, OracleSampler& oracle, Channel& channel,
                            SeededRng& rng, const RefreshOptions& opts = {}) {
  if (channel.messages_sent() != 0 || !channel.idle())
    throw ConfigError("refresh requires a fresh channel");
  const FieldParams& params = enc.params;
  if (enc.L.size() != params.n || enc.R.size() != params.n)
    throw DomainError("encoding dimension does not match params");

  OpCounter counter;
  Field f(params, &counter);
  Field quiet = f.uncounted();

  std::size_t restarts = 0;
  std::vector<std::vector<ChannelMessage>> failed_messages;
  std::vector<OpCounter> attempt_ops;

  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt > opts.restart_cap)
      throw RefusalError("restart cap " + std::to_string(opts.restart_cap) + " exceeded",
                         opts.restart_cap);

    const OpCounter before = counter;
    const std::size_t transcript_before = channel.transcript().size();
    OracleSample sample = oracle.sample(params, rng);

    PartyL left(enc.L, f);
    PartyR right(enc.R, f);
    left.receive_oracle(sample.A, sample.A_tilde);
    right.receive_oracle(sample.B, sample.B_tilde);

    auto attempt_failed = [&] {
      attempt_ops.push_back(counter - before);
      failed_messages.emplace_back(channel.transcript().begin() + transcript_before,
                                   channel.transcript().end());
      ++restarts;
    };

    left.send_masked_share(channel);
    std::optional<NonZeroVector> R_prime = right.receive_and_refresh(channel);
    if (!R_prime) {
      attempt_failed();
      continue;
    }
    right.send_masked_share(*R_prime, channel);
    std::optional<NonZeroVector> L_prime = left.receive_and_refresh(channel);
    if (!L_prime) {
      attempt_failed();
      continue;
    }

    attempt_ops.push_back(counter - before);
    std::vector<ChannelMessage> messages(channel.transcript().begin() + transcript_before,
                                         channel.transcript().end());
    FieldElement alpha = quiet.inner_product(sample.A.vec(), sample.B);
    return RefreshTrace{Encoding{std::move(*L_prime), std::move(*R_prime), params},
                        left.view(),
                        right.view(),
                        alpha,
                        restarts,
                        std::move(messages),
                        std::move(failed_messages),
                        std::move(attempt_ops)};
  }
}

// Re-derives every protocol equation from a trace: V_i = L_i^{-1} A_i,
// X = V*B, R' = R + X, V~_i = R'_i^{-1} B~_i, X~ = V~*A~, L' = L + X~, plus
// view consistency of the shared messages and of the inputs.
inline bool verify_views(const RefreshTrace& trace, const Encoding& original) {
  const FieldParams& params = original.params;
  Field f(params);
  const ViewL& vl = trace.view_l;
  const ViewR& vr = trace.view_r;
  if (vl.L != original.L || vr.R != original.R) return false;
  if (vl.V != vr.V || vl.V_tilde != vr.V_tilde) return false;
  if (vl.V.size() != params.n || vl.V_tilde.size() != params.n) return false;
  for (std::size_t i = 0; i < params.n; ++i) {
    if (vl.V[i] != f.mul(f.inv(vl.L[i]), vl.A[i])) return false;
  }
  const NonZeroVector& R_prime = trace.output.R;
  const NonZeroVector& L_prime = trace.output.L;
  for (std::size_t i = 0; i < params.n; ++i) {
    FieldElement x = f.mul(vr.V[i], vr.B[i]);
    if (R_prime[i] != f.add(vr.R[i], x)) return false;
    if (vr.V_tilde[i] != f.mul(f.inv(R_prime[i]), vr.B_tilde[i])) return false;
    FieldElement x_tilde = f.mul(vl.V_tilde[i], vl.A_tilde[i]);
    if (L_prime[i] != f.add(vl.L[i], x_tilde)) return false;
  }
  return true;
}

}  // namespace lrs
