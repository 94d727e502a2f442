#pragma once

#include <string>
#include <utility>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/rng.hpp"

namespace lrs {

// The inner-product storage scheme: a secret s is held as a pair of share
// vectors (L, R) with every coordinate nonzero and <L, R> = s. L and R live on
// independently-leaking memory parts (or parties).
struct Encoding {
  NonZeroVector L;
  NonZeroVector R;
  FieldParams params;

  friend bool operator==(const Encoding&, const Encoding&) = default;
};

enum class EncodeMode {
  // Sample L and R uniformly from (F\{0})^n and retry until <L,R> = s.
  // Exactly uniform on the constraint set; acceptance probability ~ 1/p, so
  // only suitable for small p. All distribution-critical experiments use this.
  exact_uniform,
  // Sample L and R_2..R_n from (F\{0}), solve R_1 = L_1^{-1} (s - sum L_i R_i),
  // reject only when R_1 = 0. O(n) per attempt, usable at any p, but the
  // conditioning on the solved coordinate makes the distribution differ from
  // exact-uniform. Benchmarks and large-p callers use this.
  constructive,
};

inline const char* to_string(EncodeMode m) {
  return m == EncodeMode::exact_uniform ? "rejection" : "constructive";
}

inline EncodeMode encode_mode_from_string(const std::string& s) {
  if (s == "rejection") return EncodeMode::exact_uniform;
  if (s == "constructive") return EncodeMode::constructive;
  throw ConfigError("unknown encode mode '" + s + "' (expected rejection or constructive)");
}

namespace detail {

// n=1 with s=0 is unsatisfiable: L1*R1 = 0 forces a zero coordinate.
inline void require_nonempty_constraint_set(FieldElement s, const FieldParams& params) {
  if (params.n == 1 && s.value == 0)
    throw DomainError("empty constraint set: no nonzero pair (L,R) with <L,R> = 0 at n=1");
}

}  // namespace detail

// Uniform sample from {(L,R) in ((F\{0})^n)^2 : <L,R> = s}.
inline Encoding sample_encoding_pair_with_secret(FieldElement s, const FieldParams& params,
                                                 SeededRng& rng) {
  Field f(params);
  if (s.p != params.p) throw ConfigError("secret is not an element of F_p for these params");
  detail::require_nonempty_constraint_set(s, params);
  for (;;) {
    NonZeroVector L = f.sample_nonzero_vector(rng);
    NonZeroVector R = f.sample_nonzero_vector(rng);
    if (f.inner_product(L, R) == s) return Encoding{std::move(L), std::move(R), params};
  }
}

inline Encoding encode_constructive(FieldElement s, const FieldParams& params, SeededRng& rng) {
  Field f(params);
  if (s.p != params.p) throw ConfigError("secret is not an element of F_p for these params");
  detail::require_nonempty_constraint_set(s, params);
  for (;;) {
    NonZeroVector L = f.sample_nonzero_vector(rng);
    FieldVector R;
    R.coords.resize(params.n);
    FieldElement tail = f.zero();
    for (std::size_t i = 1; i < params.n; ++i) {
      R.coords[i] = f.sample_nonzero(rng);
      tail = f.add(tail, f.mul(L[i], R.coords[i]));
    }
    FieldElement r1 = f.mul(f.inv(L[0]), f.sub(s, tail));
    if (r1.value == 0) continue;
    R.coords[0] = r1;
    return Encoding{std::move(L), NonZeroVector(std::move(R)), params};
  }
}

inline Encoding encode(FieldElement s, const FieldParams& params, SeededRng& rng,
                       EncodeMode mode = EncodeMode::exact_uniform) {
  return mode == EncodeMode::exact_uniform ? sample_encoding_pair_with_secret(s, params, rng)
                                           : encode_constructive(s, params, rng);
}

inline FieldElement decode(const Encoding& e) {
  Field f(e.params);
  return f.inner_product(e.L, e.R);
}

}  // namespace lrs
