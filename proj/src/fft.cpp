#include "hb/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace hb {

namespace {
std::mutex planner_mutex;  // FFTW's planner is not thread-safe
}

Fft::Fft(const TensorGrid& g) : size_(g.size()) {
    buf_ = fftw_malloc(sizeof(fftw_complex) * size_);
    auto* b = static_cast<fftw_complex*>(buf_);
    std::lock_guard<std::mutex> lock(planner_mutex);
    // FFTW_ESTIMATE keeps planning deterministic run to run.
    switch (g.dim()) {
        case 1:
            fwd_ = fftw_plan_dft_1d(g.n(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_1d(g.n(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
            break;
        case 2:
            fwd_ = fftw_plan_dft_2d(g.n(), g.n(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_2d(g.n(), g.n(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
            break;
        default:
            fwd_ = fftw_plan_dft_3d(g.n(), g.n(), g.n(), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_3d(g.n(), g.n(), g.n(), b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
            break;
    }
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(buf_);
}

void Fft::forward(std::vector<cplx>& a) const {
    auto* b = static_cast<fftw_complex*>(buf_);
    std::memcpy(b, a.data(), sizeof(fftw_complex) * size_);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    std::memcpy(a.data(), b, sizeof(fftw_complex) * size_);
}

void Fft::inverse(std::vector<cplx>& a) const {
    auto* b = static_cast<fftw_complex*>(buf_);
    std::memcpy(b, a.data(), sizeof(fftw_complex) * size_);
    fftw_execute(static_cast<fftw_plan>(inv_));
    const double scale = 1.0 / static_cast<double>(size_);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size_); ++i)
        a[i] = cplx(b[i][0] * scale, b[i][1] * scale);
}

const Fft& fft_for(const TensorGrid& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
    auto key = std::make_pair(g.dim(), g.n());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Fft>(g)).first;
    return *it->second;
}

}  // namespace hb
