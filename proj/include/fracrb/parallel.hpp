#pragma once

#include <cstddef>
#include <functional>

namespace fracrb::parallel {

/// Worker cap used by for_each_index. Defaults to the hardware thread
/// count, clamped by the FRACRB_THREADS environment variable when set.
std::size_t max_threads();

/// Overrides the worker cap for this process; 0 restores the default.
void set_max_threads(std::size_t n);

/// Runs fn(i) for every i in [0, count) and blocks until all are done.
/// Each index must be an independent unit of work: results are stored by
/// index on the caller's side, so the outcome does not depend on how many
/// workers ran or which worker picked which index.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& fn);

} // namespace fracrb::parallel
