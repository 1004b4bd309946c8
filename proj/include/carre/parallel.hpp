#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace carre {

/// Global worker count for the chunked parallel loops (CLI --threads).
void set_thread_count(int threads);
int thread_count();

/// Number of chunks parallel_chunks uses for a loop of the given size.
std::size_t parallel_chunk_count(std::size_t count);

/// Runs fn(chunk_index, begin, end) over a fixed partition of [0, count)
/// into parallel_chunk_count(count) chunks.  The partition does not depend
/// on the thread count, so per-chunk results combined in chunk order are
/// bit-reproducible for any --threads value.  Nested calls run serially on
/// the caller.
void parallel_chunks(
    std::size_t count,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Pairwise (tree) reduction; fixed association order.
double pairwise_sum(const std::vector<double>& values);

/// Deterministic parallel sum of term(i) for i in [0, count).
double parallel_sum(std::size_t count,
                    const std::function<double(std::size_t)>& term);

}  // namespace carre
