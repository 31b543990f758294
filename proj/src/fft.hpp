#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace osc::detail {

// unnormalized complex DFT of fixed length; plans are created once
class Fft {
 public:
  explicit Fft(int n) : n_(n), buf_(static_cast<std::size_t>(n)) {
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  int size() const { return n_; }

  void forward(std::vector<std::complex<double>>& v) { run(fwd_, v, 1.0); }
  // includes the 1/n factor
  void backward(std::vector<std::complex<double>>& v) { run(bwd_, v, 1.0 / n_); }

  // angular wavenumber of bin m on a period L
  static double wavenumber(int m, int n, double L) {
    const int s = m <= n / 2 ? m : m - n;
    return 2.0 * 3.14159265358979323846 * s / L;
  }

 private:
  void run(fftw_plan plan, std::vector<std::complex<double>>& v, double scale) {
    for (int i = 0; i < n_; ++i) buf_[i] = v[i];
    fftw_execute(plan);
    for (int i = 0; i < n_; ++i) v[i] = buf_[i] * scale;
  }

  int n_;
  std::vector<std::complex<double>> buf_;
  fftw_plan fwd_, bwd_;
};

}  // namespace osc::detail
