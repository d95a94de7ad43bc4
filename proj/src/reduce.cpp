#include "hb/reduce.hpp"

namespace hb {

double sum(const double* x, std::size_t n) {
    return sum_indexed(n, [x](std::size_t i) { return x[i]; });
}

double dot(const double* a, const double* b, std::size_t n) {
    return sum_indexed(n, [a, b](std::size_t i) { return a[i] * b[i]; });
}

double sum_serial(const double* x, std::size_t n) {
    Accum acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
    return acc.value();
}

double dot_serial(const double* a, const double* b, std::size_t n) {
    Accum acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

}  // namespace hb
