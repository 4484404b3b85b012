#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "expsplit/phi.hpp"
#include "expsplit/schemes.hpp"

namespace expsplit {

/// Amplification factor Phi(z, lambda) of one scheme applied to the split
/// heat test equation u' = lambda*L*u + (1-lambda)*L*u, z = -tau k^2.
/// The backward-forward Euler and implicit-explicit2 factors are the
/// rational functions obtained by eliminating the stage of the two-step
/// recursions; the remaining factors are the closed forms of the scheme
/// applied mode by mode.  Works for complex z (A-stability rasters).
template <typename Scalar>
Scalar stability_function_unchecked(const SchemeSpec& scheme, Scalar z,
                                    double lambda) {
  const Scalar lam(lambda);
  const Scalar one(1);
  switch (scheme.id) {
    case Scheme::ee:
      return one + z * phi(1, lam * z);
    case Scheme::le:
      return std::exp(lam * z) * (one + (one - lam) * z);
    case Scheme::sle:
      return one + z * std::exp(lam * z);
    case Scheme::erk2p2: {
      const Scalar c2(scheme.c2);
      return one + z * phi(1, lam * z) +
             z * z * (one - lam) * phi(2, lam * z) * phi(1, c2 * lam * z);
    }
    case Scheme::erk2p1: {
      const Scalar c2(scheme.c2);
      return one + z * phi(1, lam * z) +
             z * z / Scalar(2) * (one - lam) * phi(1, lam * z) *
                 phi(1, c2 * lam * z);
    }
    case Scheme::l2a:
      return std::exp(lam * z) *
             (one + z * (one - lam) * (one + z * (one - lam) / Scalar(2)));
    case Scheme::l2b:
      return std::exp(lam * z) *
             (one + z / Scalar(2) * (one - lam) +
              z / Scalar(2) * (one - lam) * (one + z * (one - lam)));
    case Scheme::sl2: {
      const Scalar al(scheme.alpha);
      return one + z * std::exp(lam * z / Scalar(2)) +
             z * z / Scalar(2) * (one - lam) * std::exp((one + al) * lam * z);
    }
    case Scheme::bfe:
      return (one + (one - lam) * z) / (one - lam * z);
    case Scheme::imex2: {
      const Scalar den = one - z / Scalar(2) * lam;
      const Scalar stage = (one + z / Scalar(2) * (one - lam)) / den;
      return (one + z / Scalar(2) * lam + z * (one - lam) * stage) / den;
    }
    case Scheme::erbe:
      throw std::invalid_argument(
          "stability_function: erbe has no scalar stability function");
  }
  throw std::logic_error("unreachable");
}

/// Checked entry point for the real spectral variable z <= 0.
double stability_function(const SchemeSpec& scheme, double z, double lambda);

/// sup over z in (-inf, 0] of |Phi(z, lambda)|: composite log+linear sampling
/// on [-1e5, 0], golden-section refinement of every sampled local maximum,
/// and the analytic z -> -inf limit.
double sup_abs_phi(const SchemeSpec& scheme, double lambda);

/// z -> -inf limit of |Phi|.
double stability_tail_limit(const SchemeSpec& scheme, double lambda);

/// Smallest lambda in [0,1] with sup |Phi| <= 1 + 1e-9, bisected to 1e-4.
double lambda_threshold(const SchemeSpec& scheme, double tol = 1e-4);

/// Minimizes lambda_threshold(sl2 with alpha) over alpha in (0,1] by
/// golden-section search; returns (alpha*, lambda*).
std::pair<double, double> optimize_alpha_sl2();

struct RegionWindow {
  double re_min, re_max, im_min, im_max;
};

struct StabilityRaster {
  int width = 0, height = 0;        // pixels across re and im
  RegionWindow window{};
  std::vector<unsigned char> inside;  // row 0 = top (largest Im), 1 = stable

  bool at(int ix, int iy) const { return inside[size_t(iy) * width + ix] != 0; }
};

/// Rasterizes {z : |Phi(z, lambda)| <= 1} over the window.  Pixel centers
/// sample the window uniformly; rows are partitioned across worker threads
/// (EXPSPLIT_THREADS) with deterministic output.
StabilityRaster astability_region(const SchemeSpec& scheme, double lambda,
                                  const RegionWindow& window, int width,
                                  int height);

void write_pgm(const StabilityRaster& raster, const std::string& path);

}  // namespace expsplit
