#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrs/errors.hpp"
#include "lrs/rng.hpp"

namespace lrs {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Deterministic Miller-Rabin, exact for all 64-bit inputs with the fixed base
// set {2,3,5,7,11,13,17,19,23,29,31,37}.
inline bool is_prime_u64(u64 m) {
  if (m < 2) return false;
  for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (m == q) return true;
    if (m % q == 0) return false;
  }
  u64 d = m - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  auto mulmod = [m](u64 a, u64 b) { return static_cast<u64>((u128)a * b % m); };
  auto powmod = [&](u64 a, u64 e) {
    u64 acc = 1;
    while (e) {
      if (e & 1) acc = mulmod(acc, a);
      a = mulmod(a, a);
      e >>= 1;
    }
    return acc;
  };
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a % m, d);
    if (x == 1 || x == m - 1) continue;
    bool witness = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod(x, x);
      if (x == m - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

enum class FieldMode { standard, relaxed };

inline const char* to_string(FieldMode m) {
  return m == FieldMode::standard ? "standard" : "relaxed";
}

inline FieldMode field_mode_from_string(const std::string& s) {
  if (s == "standard") return FieldMode::standard;
  if (s == "relaxed") return FieldMode::relaxed;
  throw ConfigError("unknown mode '" + s + "' (expected standard or relaxed)");
}

// Prime modulus p and vector dimension n. Standard mode enforces p >= 4n;
// relaxed mode lifts that for tiny enumeration instances and is recorded in
// every output artifact.
struct FieldParams {
  u64 p;
  std::size_t n;
  FieldMode mode;

  FieldParams(u64 p, std::size_t n, FieldMode mode = FieldMode::standard)
      : p(p), n(n), mode(mode) {
    if (p < 3) throw ConfigError("modulus must be >= 3, got " + std::to_string(p));
    if (p > (1ULL << 63) - 1)
      throw ConfigError("modulus must fit in 63 bits, got " + std::to_string(p));
    if (!is_prime_u64(p)) throw ConfigError("modulus " + std::to_string(p) + " is not prime");
    if (n < 1) throw ConfigError("dimension must be >= 1");
    if (mode == FieldMode::standard && p < 4 * static_cast<u64>(n))
      throw ConfigError("standard mode requires p >= 4n (p=" + std::to_string(p) +
                        ", n=" + std::to_string(n) + "); use relaxed mode for smaller fields");
  }

  friend bool operator==(const FieldParams&, const FieldParams&) = default;
};

// A residue in [0, p). Carries its modulus so cross-field mixing is caught.
struct FieldElement {
  u64 value = 0;
  u64 p = 0;

  friend bool operator==(const FieldElement&, const FieldElement&) = default;
  friend auto operator<=>(const FieldElement&, const FieldElement&) = default;
};

struct FieldVector {
  std::vector<FieldElement> coords;

  std::size_t size() const { return coords.size(); }
  FieldElement& operator[](std::size_t i) { return coords[i]; }
  const FieldElement& operator[](std::size_t i) const { return coords[i]; }

  friend bool operator==(const FieldVector&, const FieldVector&) = default;
};

inline bool has_zero_coordinate(const FieldVector& v) {
  for (const auto& c : v.coords)
    if (c.value == 0) return true;
  return false;
}

// A vector with every coordinate nonzero; validated at construction.
struct NonZeroVector {
  NonZeroVector() = default;
  explicit NonZeroVector(FieldVector v) : vec_(std::move(v)) {
    if (has_zero_coordinate(vec_)) throw DomainError("zero coordinate in NonZeroVector");
  }

  const FieldVector& vec() const { return vec_; }
  std::size_t size() const { return vec_.size(); }
  const FieldElement& operator[](std::size_t i) const { return vec_[i]; }

  friend bool operator==(const NonZeroVector&, const NonZeroVector&) = default;

 private:
  FieldVector vec_;
};

// Counts of field operations inside one counting scope. Additions and
// subtractions both land in `adds`; an inverse counts once regardless of how
// it is computed internally.
struct OpCounter {
  u64 adds = 0;
  u64 muls = 0;
  u64 invs = 0;

  u64 total() const { return adds + muls + invs; }

  OpCounter& operator+=(const OpCounter& o) {
    adds += o.adds;
    muls += o.muls;
    invs += o.invs;
    return *this;
  }
  friend OpCounter operator-(OpCounter a, const OpCounter& b) {
    return {a.adds - b.adds, a.muls - b.muls, a.invs - b.invs};
  }
  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

// Arithmetic context for one field. Holds the parameters and an optional
// counting scope; a null counter means operations are not counted. Counting
// scopes are per run and must not be shared between concurrent runs.
class Field {
 public:
  explicit Field(FieldParams params, OpCounter* counter = nullptr)
      : params_(params), counter_(counter) {}

  const FieldParams& params() const { return params_; }
  u64 p() const { return params_.p; }
  std::size_t n() const { return params_.n; }
  OpCounter* counter() const { return counter_; }

  // Same field, no counting scope.
  Field uncounted() const { return Field(params_); }

  // Makes an element from an arbitrary integer, reduced mod p.
  FieldElement element(u64 v) const { return {v % params_.p, params_.p}; }

  FieldElement zero() const { return {0, params_.p}; }
  FieldElement one() const { return {1, params_.p}; }

  FieldElement add(FieldElement a, FieldElement b) const {
    check(a);
    check(b);
    if (counter_) ++counter_->adds;
    u64 s = a.value + b.value;  // p < 2^63, no overflow
    if (s >= params_.p) s -= params_.p;
    return {s, params_.p};
  }

  FieldElement sub(FieldElement a, FieldElement b) const {
    check(a);
    check(b);
    if (counter_) ++counter_->adds;
    u64 s = a.value >= b.value ? a.value - b.value : a.value + params_.p - b.value;
    return {s, params_.p};
  }

  FieldElement neg(FieldElement a) const {
    check(a);
    return {a.value == 0 ? 0 : params_.p - a.value, params_.p};
  }

  FieldElement mul(FieldElement a, FieldElement b) const {
    check(a);
    check(b);
    if (counter_) ++counter_->muls;
    return {static_cast<u64>((u128)a.value * b.value % params_.p), params_.p};
  }

  FieldElement inv(FieldElement a) const {
    check(a);
    if (a.value == 0) throw DomainError("inverse of zero");
    if (counter_) ++counter_->invs;
    // Extended Euclid; coefficients tracked in signed 128-bit to be safe for
    // moduli up to 2^63 - 1.
    __int128 t = 0, new_t = 1;
    u64 r = params_.p, new_r = a.value;
    while (new_r != 0) {
      u64 q = r / new_r;
      __int128 tmp_t = t - (__int128)q * new_t;
      t = new_t;
      new_t = tmp_t;
      u64 tmp_r = r - q * new_r;
      r = new_r;
      new_r = tmp_r;
    }
    if (t < 0) t += params_.p;
    return {static_cast<u64>(t), params_.p};
  }

  // Sum of coordinate products; counts exactly n muls and n-1 adds.
  FieldElement inner_product(const FieldVector& u, const FieldVector& v) const {
    if (u.size() != v.size() || u.size() != params_.n)
      throw DomainError("inner_product dimension mismatch: " + std::to_string(u.size()) + " vs " +
                        std::to_string(v.size()) + " (n=" + std::to_string(params_.n) + ")");
    FieldElement acc = mul(u[0], v[0]);
    for (std::size_t i = 1; i < u.size(); ++i) acc = add(acc, mul(u[i], v[i]));
    return acc;
  }
  FieldElement inner_product(const NonZeroVector& u, const NonZeroVector& v) const {
    return inner_product(u.vec(), v.vec());
  }
  FieldElement inner_product(const NonZeroVector& u, const FieldVector& v) const {
    return inner_product(u.vec(), v);
  }

  FieldVector vec_add(const FieldVector& u, const FieldVector& v) const {
    require_dim(u);
    require_dim(v);
    FieldVector out;
    out.coords.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out.coords.push_back(add(u[i], v[i]));
    return out;
  }

  FieldVector vec_sub(const FieldVector& u, const FieldVector& v) const {
    require_dim(u);
    require_dim(v);
    FieldVector out;
    out.coords.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out.coords.push_back(sub(u[i], v[i]));
    return out;
  }

  FieldElement sample_uniform(SeededRng& rng) const {
    return {rng.uniform_below(params_.p), params_.p};
  }

  // Rejection from the uniform draw; exactly uniform on F \ {0}, fewer than
  // two draws expected.
  FieldElement sample_nonzero(SeededRng& rng) const {
    for (;;) {
      u64 v = rng.uniform_below(params_.p);
      if (v != 0) return {v, params_.p};
    }
  }

  FieldVector sample_vector(SeededRng& rng) const {
    FieldVector out;
    out.coords.reserve(params_.n);
    for (std::size_t i = 0; i < params_.n; ++i) out.coords.push_back(sample_uniform(rng));
    return out;
  }

  NonZeroVector sample_nonzero_vector(SeededRng& rng) const {
    FieldVector out;
    out.coords.reserve(params_.n);
    for (std::size_t i = 0; i < params_.n; ++i) out.coords.push_back(sample_nonzero(rng));
    return NonZeroVector(std::move(out));
  }

  // Builds a vector from raw residues (each must be < p).
  FieldVector vector_from(const std::vector<u64>& values) const {
    if (values.size() != params_.n)
      throw DomainError("vector length " + std::to_string(values.size()) + " does not match n=" +
                        std::to_string(params_.n));
    FieldVector out;
    out.coords.reserve(values.size());
    for (u64 v : values) {
      if (v >= params_.p)
        throw DomainError("coordinate " + std::to_string(v) + " out of range for p=" +
                          std::to_string(params_.p));
      out.coords.push_back({v, params_.p});
    }
    return out;
  }

 private:
  void check(FieldElement a) const {
    if (a.p != params_.p)
      throw ConfigError("element of F_" + std::to_string(a.p) + " used in F_" +
                        std::to_string(params_.p));
  }
  void require_dim(const FieldVector& v) const {
    if (v.size() != params_.n)
      throw DomainError("vector length " + std::to_string(v.size()) + " does not match n=" +
                        std::to_string(params_.n));
  }

  FieldParams params_;
  OpCounter* counter_;
};

}  // namespace lrs
