#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace qslab {

// Unitary DFT of length n (1/sqrt(n) both ways), backed by FFTW.
//   forward:  X_m = n^-1/2 sum_i x_i exp(-2 pi i m i / n)
//   inverse:  x_i = n^-1/2 sum_m X_m exp(+2 pi i m i / n)
// One object per thread; plans are created under a global lock.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qslab
