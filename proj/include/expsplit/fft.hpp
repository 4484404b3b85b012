#pragma once

#include "expsplit/grid.hpp"

namespace expsplit {

/// Unnormalized-forward / 1/N-inverse Fourier transforms over the full grid,
/// complex to complex.  Plans are created once (FFTW, unaligned estimate
/// plans) and may be executed concurrently on distinct buffers.
class Fft {
 public:
  explicit Fft(const GridSpec& grid);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  Index size() const { return size_; }

  ArrayXcd forward(const ArrayXd& values) const;
  ArrayXcd forward(const ArrayXcd& values) const;
  ArrayXcd inverse(const ArrayXcd& coeffs) const;  // includes the 1/N factor
  ArrayXd inverse_real(const ArrayXcd& coeffs) const;

  /// Cached forward transform of a Field.
  const ArrayXcd& spectrum(const Field& f) const {
    if (!f.has_spectrum()) f.cache_spectrum(forward(f.cvalues()));
    return f.spectrum();
  }

 private:
  Index size_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

}  // namespace expsplit
