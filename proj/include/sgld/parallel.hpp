#pragma once

#include <cstddef>
#include <exception>
#include <string_view>
#include <vector>

namespace sgld {

enum class ExecutionPolicy { Serial, Parallel };

std::string_view to_string(ExecutionPolicy policy);

// Runs fn(i) for i in [0, count). Every index writes only its own output slot,
// so both policies produce identical results. The exception thrown by the
// lowest failing index is rethrown after all indices finish.
template <class Fn>
void for_each_index(std::size_t count, ExecutionPolicy policy, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  if (policy == ExecutionPolicy::Serial) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace sgld
