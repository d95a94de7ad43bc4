#pragma once

#include <complex>
#include <vector>

#include "hb/grid.hpp"

namespace hb {

using cplx = std::complex<double>;

// Thin RAII wrapper over FFTW c2c plans with internal staging buffers.
// forward() is the unnormalized DFT; inverse() carries the 1/n^N factor, so
// inverse(forward(a)) == a up to roundoff.  Instances are not safe for
// concurrent use; fft_for() hands out one instance per (grid, thread).
class Fft {
  public:
    explicit Fft(const TensorGrid& g);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(std::vector<cplx>& a) const;
    void inverse(std::vector<cplx>& a) const;

  private:
    std::size_t size_;
    void* buf_;  // fftw_complex*
    void* fwd_;  // fftw_plan
    void* inv_;  // fftw_plan
};

// Thread-local plan cache keyed by (dim, n).
const Fft& fft_for(const TensorGrid& g);

}  // namespace hb
