#pragma once

#include <deque>
#include <memory>
#include <utility>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/rng.hpp"

namespace lrs {

// One draw from the trusted leak-free sampler: vectors (A, A~, B, B~) with
//   C1: <A,B> + <A~,B~> = 0
//   C2: A_i != 0 for all i
//   C3: B~_i != 0 for all i
// The sampler is a local trusted component; nothing it computes enters any
// leakage query surface or counting scope.
struct OracleSample {
  NonZeroVector A;
  FieldVector A_tilde;
  FieldVector B;
  NonZeroVector B_tilde;
  FieldParams params;

  friend bool operator==(const OracleSample&, const OracleSample&) = default;
};

inline bool verify(const OracleSample& s) {
  if (s.A.size() != s.params.n || s.A_tilde.size() != s.params.n || s.B.size() != s.params.n ||
      s.B_tilde.size() != s.params.n)
    return false;
  // C2/C3 are enforced by the NonZeroVector type but re-scanned here so that
  // hand-built samples with default-constructed members are still rejected.
  if (has_zero_coordinate(s.A.vec()) || has_zero_coordinate(s.B_tilde.vec())) return false;
  Field f(s.params);
  FieldElement lhs = f.add(f.inner_product(s.A.vec(), s.B), f.inner_product(s.A_tilde, s.B_tilde.vec()));
  return lhs.value == 0;
}

class OracleSampler {
 public:
  virtual ~OracleSampler() = default;
  virtual OracleSample sample(const FieldParams& params, SeededRng& rng) = 0;
};

// Draws A <- (F\{0})^n, A~ <- F^n, B~ <- (F\{0})^n and B_2..B_n <- F uniformly,
// then solves B_1 = A_1^{-1} (-<A~,B~> - sum_{i>=2} A_i B_i). For every fixed
// (A, A~, B~) the valid B form an affine hyperplane of the same cardinality
// |F|^{n-1}, so the joint output is exactly uniform on the constraint set.
// The test suite validates this against full enumeration on tiny instances.
class RandomOracleSampler : public OracleSampler {
 public:
  OracleSample sample(const FieldParams& params, SeededRng& rng) override {
    Field f(params);
    NonZeroVector A = f.sample_nonzero_vector(rng);
    FieldVector A_tilde = f.sample_vector(rng);
    NonZeroVector B_tilde = f.sample_nonzero_vector(rng);
    FieldVector B;
    B.coords.resize(params.n);
    FieldElement acc = f.inner_product(A_tilde, B_tilde.vec());
    for (std::size_t i = 1; i < params.n; ++i) {
      B.coords[i] = f.sample_uniform(rng);
      acc = f.add(acc, f.mul(A[i], B.coords[i]));
    }
    B.coords[0] = f.mul(f.inv(A[0]), f.neg(acc));
    return OracleSample{std::move(A), std::move(A_tilde), std::move(B), std::move(B_tilde), params};
  }
};

// Serves queued samples in order, then either defers to a fallback sampler or
// throws OracleExhaustedError. Drives golden tests, forced restarts, and the
// exact enumeration engine.
class ScriptedOracleSampler : public OracleSampler {
 public:
  explicit ScriptedOracleSampler(std::deque<OracleSample> queue,
                                 std::unique_ptr<OracleSampler> fallback = nullptr)
      : queue_(std::move(queue)), fallback_(std::move(fallback)) {}

  OracleSample sample(const FieldParams& params, SeededRng& rng) override {
    if (!queue_.empty()) {
      OracleSample s = std::move(queue_.front());
      queue_.pop_front();
      if (s.params != params) throw ConfigError("scripted oracle sample has mismatched params");
      if (!verify(s)) throw DomainError("scripted oracle sample violates C1-C3");
      return s;
    }
    if (fallback_) return fallback_->sample(params, rng);
    throw OracleExhaustedError("scripted oracle has no more samples");
  }

  std::size_t remaining() const { return queue_.size(); }

 private:
  std::deque<OracleSample> queue_;
  std::unique_ptr<OracleSampler> fallback_;
};

}  // namespace lrs
