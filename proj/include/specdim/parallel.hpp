#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace specdim::par {

/// Worker-count cap (0 = OpenMP default). Set from the CLI --threads flag.
void set_max_threads(int n);
int max_threads();

/// Block partition of [0, n). Block boundaries depend only on n and block
/// size, never on the thread count, so per-block results are reproducible.
inline std::size_t block_count(std::size_t n, std::size_t block) {
    return block == 0 ? 0 : (n + block - 1) / block;
}

/// Pairwise tree sum in a fixed order; bit-identical for any thread count.
double tree_sum(std::span<const double> v);

/// Neumaier-compensated sum in the given iteration order.
double compensated_sum(std::span<const double> v);

/// In-place elementwise tree combination of per-block rows: for each column j,
/// out[j] = tree-sum over rows of rows[r][j]. Rows must share a length.
void tree_combine_rows(const std::vector<std::vector<double>>& rows, std::vector<double>& out);

/// Runs fn(block_index, lo, hi) for each fixed-size block of [0, n), in
/// parallel when OpenMP is available. fn must not touch shared mutable state
/// other than its own block's slot.
template <class F>
void for_blocks(std::size_t n, std::size_t block, F&& fn) {
    const std::int64_t nb = static_cast<std::int64_t>(block_count(n, block));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads() > 0 ? max_threads() : omp_get_max_threads())
#endif
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * block;
        const std::size_t hi = lo + block < n ? lo + block : n;
        fn(static_cast<std::size_t>(b), lo, hi);
    }
}

/// Plain parallel index loop (independent iterations).
template <class F>
void for_indices(std::size_t n, F&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(max_threads() > 0 ? max_threads() : omp_get_max_threads())
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        fn(static_cast<std::size_t>(i));
    }
}

}  // namespace specdim::par
