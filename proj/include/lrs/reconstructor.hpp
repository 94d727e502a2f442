#pragma once

#include <utility>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/refresh.hpp"
#include "lrs/rng.hpp"

namespace lrs {

// Offline common randomness for the non-interactive reconstruction: V and V~
// are sampled independently and uniformly from (F\{0})^n and handed to both
// sides before the procedure starts.
struct CommonRandomness {
  NonZeroVector V;
  NonZeroVector V_tilde;

  friend bool operator==(const CommonRandomness&, const CommonRandomness&) = default;
};

inline CommonRandomness sample_common_randomness(const FieldParams& params, SeededRng& rng) {
  Field f(params);
  NonZeroVector V = f.sample_nonzero_vector(rng);
  NonZeroVector V_tilde = f.sample_nonzero_vector(rng);
  return CommonRandomness{std::move(V), std::move(V_tilde)};
}

// Rebuilds both parties' refresh views from the old and new share pairs plus
// the offline randomness, without exchanging a single message:
//   P_L:  A_i := V_i * L_i,          X~ := L' - L,  A~_i := V~_i^{-1} * X~_i
//   P_R:  X := R' - R,  B_i := V_i^{-1} * X_i,      B~_i := V~_i * R'_i
// Pure function of its inputs. Requires <L,R> = <L',R'>; the equality is
// checked eagerly because the reconstruction is only meaningful under it.
inline std::pair<ViewL, ViewR> reconstruct(const Encoding& old_enc, const Encoding& new_enc,
                                           const CommonRandomness& cr) {
  if (old_enc.params != new_enc.params)
    throw ConfigError("old and new encodings have different field params");
  const FieldParams& params = old_enc.params;
  Field f(params);
  if (old_enc.L.size() != params.n || new_enc.L.size() != params.n || cr.V.size() != params.n ||
      cr.V_tilde.size() != params.n)
    throw DomainError("reconstruct dimension mismatch");
  if (f.inner_product(old_enc.L, old_enc.R) != f.inner_product(new_enc.L, new_enc.R))
    throw PreconditionError("inner products of old and new encodings differ");

  const std::size_t n = params.n;
  FieldVector A, B, A_tilde, B_tilde;
  A.coords.reserve(n);
  B.coords.reserve(n);
  A_tilde.coords.reserve(n);
  B_tilde.coords.reserve(n);

  FieldVector X = f.vec_sub(new_enc.R.vec(), old_enc.R.vec());
  FieldVector X_tilde = f.vec_sub(new_enc.L.vec(), old_enc.L.vec());
  for (std::size_t i = 0; i < n; ++i) {
    A.coords.push_back(f.mul(cr.V[i], old_enc.L[i]));
    B.coords.push_back(f.mul(f.inv(cr.V[i]), X[i]));
    B_tilde.coords.push_back(f.mul(cr.V_tilde[i], new_enc.R[i]));
    A_tilde.coords.push_back(f.mul(f.inv(cr.V_tilde[i]), X_tilde[i]));
  }

  // A and B~ are products of nonzero coordinates, so the conversions cannot
  // throw when the input encodings are well-formed.
  ViewL view_l{old_enc.L, NonZeroVector(std::move(A)), cr.V.vec(), std::move(A_tilde),
               cr.V_tilde.vec()};
  ViewR view_r{old_enc.R, std::move(B), cr.V.vec(), NonZeroVector(std::move(B_tilde)),
               cr.V_tilde.vec()};
  return {std::move(view_l), std::move(view_r)};
}

// Checks that the (A, A~, B, B~) implied by a pair of views satisfy the
// leak-free sampler's constraints C1-C3.
inline bool check_reconstruction_constraints(const ViewL& view_l, const ViewR& view_r) {
  if (view_l.A.size() != view_r.B.size() || view_l.A_tilde.size() != view_r.B_tilde.size() ||
      view_l.A.size() == 0)
    return false;
  if (has_zero_coordinate(view_l.A.vec()) || has_zero_coordinate(view_r.B_tilde.vec()))
    return false;
  if (view_l.A.size() != view_l.A_tilde.size()) return false;
  const u64 p = view_l.A[0].p;
  Field f(FieldParams(p, view_l.A.size(),
                      p >= 4 * static_cast<u64>(view_l.A.size()) ? FieldMode::standard
                                                                 : FieldMode::relaxed));
  FieldElement s =
      f.add(f.inner_product(view_l.A.vec(), view_r.B), f.inner_product(view_l.A_tilde, view_r.B_tilde.vec()));
  return s.value == 0;
}

}  // namespace lrs
