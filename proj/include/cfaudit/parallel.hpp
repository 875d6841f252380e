#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfaudit {

// Deterministic parallel reductions. Work is cut into fixed-size chunks;
// each chunk is accumulated sequentially and the per-chunk partials are
// combined in chunk order. The result is bit-identical for any thread
// count, including the serial case.

inline constexpr std::size_t kReductionChunk = 4096;

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// f(i) -> double, summed over i in [0, n)
template <typename F>
double chunked_sum(std::size_t n, F&& f) {
    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
        const std::size_t hi = lo + kReductionChunk < n ? lo + kReductionChunk : n;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += f(i);
        partial[static_cast<std::size_t>(c)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// f(i, acc) accumulates row i into a dim-sized accumulator; partials are
// combined coordinate-wise in chunk order.
template <typename F>
std::vector<double> chunked_sum_vec(std::size_t n, std::size_t dim, F&& f) {
    const std::size_t n_chunks = (n + kReductionChunk - 1) / kReductionChunk;
    std::vector<std::vector<double>> partial(n_chunks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t lo = static_cast<std::size_t>(c) * kReductionChunk;
        const std::size_t hi = lo + kReductionChunk < n ? lo + kReductionChunk : n;
        std::vector<double> acc(dim, 0.0);
        for (std::size_t i = lo; i < hi; ++i) f(i, acc.data());
        partial[static_cast<std::size_t>(c)] = std::move(acc);
    }
    std::vector<double> total(dim, 0.0);
    for (const auto& p : partial)
        for (std::size_t j = 0; j < dim; ++j) total[j] += p[j];
    return total;
}

}  // namespace cfaudit
