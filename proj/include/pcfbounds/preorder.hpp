#pragma once

#include "pcfbounds/term.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf {

/// Decides whether `m ⊑ n` is derivable from the extensional preorder rules:
/// congruence for every constructor, `err- ⊑ M` and `M ⊑ err+` at type nat,
/// and the two fixpoint rules relating `fix M` to applications `M' N'`.
/// The error axioms are also taken at arrow types with the seeds of
/// `err_at_type` (`\x1..xn. err- ⊑ M` and `M ⊑ \x1..xn. err+`), which the
/// unfolding of higher-type fixpoints needs. Both terms must have type `ty`
/// in `ctx` (TypeError otherwise).
///
/// Each fixpoint rule shrinks one side and keeps the other, so the search
/// terminates on the lexicographic pair of sizes. Results are memoized per
/// pair of alpha-classes.
bool term_preorder_leq(const Term& m, const Term& n, const Context& ctx, const Type& ty);

}  // namespace pcf
