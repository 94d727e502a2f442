#pragma once

// Umbrella header: the whole library.
//
//   field.hpp           F_p arithmetic, vectors, operation counting
//   lrs_core.hpp        inner-product encoding of secrets, encode/decode
//   leakfree_oracle.hpp trusted sampler for correlated masking vectors
//   channel.hpp         recorded two-party message channel
//   refresh.hpp         interactive O(n) share-refresh protocol
//   reconstructor.hpp   non-interactive view reconstruction
//   leakage_game.hpp    bounded-leakage adversary game
//   experiments.hpp     exact and Monte Carlo distribution experiments
//   stats.hpp           chi-square, Wilson intervals, TV distance, line fits
//   io.hpp              text formats and deterministic reports
//   rng.hpp             seeded, label-derivable deterministic RNG
//   errors.hpp          error hierarchy

#include "lrs/channel.hpp"
#include "lrs/errors.hpp"
#include "lrs/experiments.hpp"
#include "lrs/field.hpp"
#include "lrs/io.hpp"
#include "lrs/leakage_game.hpp"
#include "lrs/leakfree_oracle.hpp"
#include "lrs/lrs_core.hpp"
#include "lrs/reconstructor.hpp"
#include "lrs/refresh.hpp"
#include "lrs/rng.hpp"
#include "lrs/stats.hpp"
