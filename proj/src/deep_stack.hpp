#pragma once

// Recursive algorithms over terms run on the caller's stack when the term is
// shallow, and on a dedicated thread with a large stack otherwise.

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <type_traits>
#include <utility>

#include "pcfbounds/term.hpp"

namespace pcf::detail {

/// Terms at most this deep never leave the caller's stack.
inline constexpr std::uint32_t kShallowDepth = 2000;

/// Runs `fn` on a thread with a large stack and rethrows its exception.
void run_on_large_stack(const std::function<void()>& fn);

/// True on a thread started by run_on_large_stack.
bool on_large_stack() noexcept;

template <typename F>
auto with_depth(std::uint32_t depth, F&& fn) -> std::invoke_result_t<F&> {
  using R = std::invoke_result_t<F&>;
  if (depth <= kShallowDepth || on_large_stack()) return fn();
  if (depth > kMaxTermDepth) {
    throw DepthExceeded("term depth " + std::to_string(depth) + " exceeds the supported maximum " +
                        std::to_string(kMaxTermDepth));
  }
  if constexpr (std::is_void_v<R>) {
    run_on_large_stack([&] { fn(); });
  } else {
    std::optional<R> out;
    run_on_large_stack([&] { out.emplace(fn()); });
    return std::move(*out);
  }
}

}  // namespace pcf::detail
