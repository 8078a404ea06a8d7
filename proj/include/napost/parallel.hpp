#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace napost {

// Number of worker threads to use. Reads NEWMARK_APOST_THREADS once per
// process; 0 or unset means "auto" (hardware concurrency).
int worker_count();

// Run fn(chunk_begin, chunk_end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n, never on the thread count, so any
// reduction that combines per-chunk partials in chunk order is deterministic.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic parallel sum: reduces term(i) over [0, n) with per-chunk
// partials combined in chunk order.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term);

// Chunk size shared by all deterministic reductions.
inline constexpr std::size_t kChunkSize = 8192;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace napost
