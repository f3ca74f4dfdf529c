#include "qslab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

#include "qslab/error.hpp"

namespace qslab {
namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft::Impl {
  fftw_complex* buf_in = nullptr;
  fftw_complex* buf_out = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Fft::Fft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw ParameterError("fft: zero length");
  std::lock_guard lock(plan_mutex());
  impl_->buf_in = fftw_alloc_complex(n);
  impl_->buf_out = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  impl_->fwd = fftw_plan_dft_1d(len, impl_->buf_in, impl_->buf_out, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_1d(len, impl_->buf_in, impl_->buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->buf_in);
  fftw_free(impl_->buf_out);
}

namespace {
void run(fftw_plan plan, fftw_complex* bin, fftw_complex* bout, std::size_t n,
         std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != n || out.size() != n) throw ParameterError("fft: length mismatch");
  std::memcpy(bin, in.data(), n * sizeof(fftw_complex));
  fftw_execute(plan);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out[i] = {bout[i][0] * s, bout[i][1] * s};
}
}  // namespace

void Fft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(impl_->fwd, impl_->buf_in, impl_->buf_out, n_, in, out);
}

void Fft::inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  run(impl_->inv, impl_->buf_in, impl_->buf_out, n_, in, out);
}

}  // namespace qslab
