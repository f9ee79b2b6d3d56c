#ifndef NPSPECTRA_PARALLEL_HPP
#define NPSPECTRA_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace npspectra {

// Worker cap: NPSPECTRA_THREADS if set and positive, otherwise
// hardware_concurrency. Read once per process.
std::size_t worker_count();

// Runs body(i) for i in [0, n). Rows are dealt to workers in contiguous
// blocks and every body(i) owns its output slot exclusively, so results are
// bit-identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace npspectra

#endif
