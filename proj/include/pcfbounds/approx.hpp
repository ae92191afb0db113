#pragma once

#include <cstdint>

#include "pcfbounds/term.hpp"
#include "pcfbounds/typing.hpp"

namespace pcf {

enum class Polarity { Lower, Upper };

const char* to_string(Polarity p);

/// `\x1:s1. ... \xn:sn. E` for `ty = s1 -> ... -> sn -> nat`, where `E` is
/// `err-` for the lower polarity and `err+` for the upper one.
Term err_at_type(const Type& ty, Polarity polarity);

/// Replaces, bottom-up, every `fix P` of type `s` by `P' (P' (... (P' e)))`
/// with `k` applications of the already-unfolded body `P'` and seed
/// `e = err_at_type(s, polarity)`. The result is fix-free and has the type of
/// `t`. Throws TypeError if `t` is ill-typed in `ctx`.
Term unfold(const Term& t, std::uint32_t k, Polarity polarity, const Context& ctx);

/// `let z = t in err+`: raises err+ exactly when `t` reaches a numeral, and
/// propagates `t`'s own errors otherwise.
Term wrap_observe(const Term& t);

}  // namespace pcf
