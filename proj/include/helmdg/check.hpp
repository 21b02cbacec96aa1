// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace helmdg {

// Deterministic invariant suite behind `helmdg check`: lifting moments,
// assembly-path equivalence, norm inequalities, conformity identities, and
// post-solve Galerkin orthogonality. Writes one line per check to `log`
// (fixed seeds, no timestamps, so repeated runs serialize identically) and
// returns the number of failed checks.
int run_check(std::ostream& log);

}  // namespace helmdg
