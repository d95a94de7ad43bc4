#pragma once

#include <cmath>
#include <cstddef>

namespace hb {

// Neumaier-compensated accumulator.
struct Accum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// All reductions below are deterministic for any thread count: the index range
// is cut into a fixed number of chunks, each chunk is summed with compensation,
// and the per-chunk results are combined serially in index order.
inline constexpr std::size_t kReduceChunks = 256;

template <class F>
double sum_indexed(std::size_t n, F&& f) {
    if (n == 0) return 0.0;
    const std::size_t chunk = (n + kReduceChunks - 1) / kReduceChunks;
    const std::size_t m = (n + chunk - 1) / chunk;
    double partial[kReduceChunks];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(m); ++ci) {
        const std::size_t lo = static_cast<std::size_t>(ci) * chunk;
        const std::size_t hi = lo + chunk < n ? lo + chunk : n;
        Accum a;
        for (std::size_t i = lo; i < hi; ++i) a.add(f(i));
        partial[ci] = a.value();
    }
    Accum total;
    for (std::size_t ci = 0; ci < m; ++ci) total.add(partial[ci]);
    return total.value();
}

double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// Plain ordered compensated sums; reference path for the parallel reductions.
double sum_serial(const double* x, std::size_t n);
double dot_serial(const double* a, const double* b, std::size_t n);

}  // namespace hb
