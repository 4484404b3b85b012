#include "expsplit/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

namespace expsplit {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// fftw_malloc'd scratch, matching the alignment the plans were created with,
// so fftw_execute_dft stays safe on per-call buffers from any thread.
struct Scratch {
  fftw_complex* p;
  explicit Scratch(Index n)
      : p(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_t(n)))) {}
  ~Scratch() { fftw_free(p); }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
};

}  // namespace

Fft::Fft(const GridSpec& grid) {
  grid.validate();
  size_ = grid.size();
  // FFTW is row-major with n[0] slowest; our layout has x1 fastest, so the
  // dimension list is reversed.
  int dims[3];
  for (int mu = 0; mu < grid.dim; ++mu)
    dims[mu] = int(grid.n[grid.dim - 1 - mu]);
  Scratch in(size_), out(size_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft(grid.dim, dims, in.p, out.p, FFTW_FORWARD, FFTW_MEASURE);
  plan_bwd_ = fftw_plan_dft(grid.dim, dims, in.p, out.p, FFTW_BACKWARD, FFTW_MEASURE);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

ArrayXcd Fft::forward(const ArrayXd& values) const {
  Scratch in(size_), out(size_);
  for (Index i = 0; i < size_; ++i) {
    in.p[i][0] = values[i];
    in.p[i][1] = 0.0;
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), in.p, out.p);
  ArrayXcd result(size_);
  std::memcpy(result.data(), out.p, sizeof(fftw_complex) * size_t(size_));
  return result;
}

ArrayXcd Fft::forward(const ArrayXcd& values) const {
  Scratch in(size_), out(size_);
  std::memcpy(in.p, values.data(), sizeof(fftw_complex) * size_t(size_));
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), in.p, out.p);
  ArrayXcd result(size_);
  std::memcpy(result.data(), out.p, sizeof(fftw_complex) * size_t(size_));
  return result;
}

ArrayXcd Fft::inverse(const ArrayXcd& coeffs) const {
  Scratch in(size_), out(size_);
  std::memcpy(in.p, coeffs.data(), sizeof(fftw_complex) * size_t(size_));
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), in.p, out.p);
  ArrayXcd result(size_);
  const double scale = 1.0 / double(size_);
  for (Index i = 0; i < size_; ++i)
    result[i] = std::complex<double>(out.p[i][0] * scale, out.p[i][1] * scale);
  return result;
}

ArrayXd Fft::inverse_real(const ArrayXcd& coeffs) const {
  Scratch in(size_), out(size_);
  std::memcpy(in.p, coeffs.data(), sizeof(fftw_complex) * size_t(size_));
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), in.p, out.p);
  ArrayXd result(size_);
  const double scale = 1.0 / double(size_);
  for (Index i = 0; i < size_; ++i) result[i] = out.p[i][0] * scale;
  return result;
}

}  // namespace expsplit
