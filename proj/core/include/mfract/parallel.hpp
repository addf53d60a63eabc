#pragma once

#include <cstddef>
#include <functional>

namespace mfract {

// Number of worker threads used by the library. Defaults to the hardware
// concurrency, capped by the MFRACT_THREADS environment variable when set.
std::size_t thread_count();

// Override the thread count for the current process (0 restores the
// environment/hardware default). Intended for tests and the CLI.
void set_thread_count(std::size_t n);

// Runs body(begin, end) over contiguous row bands of [0, rows). Bands are
// disjoint, so any kernel that writes only its own rows produces results
// independent of the number of threads.
void parallel_rows(std::size_t rows,
                   const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mfract
