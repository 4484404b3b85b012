#include "expsplit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "expsplit/threads.hpp"

namespace expsplit {

namespace {

constexpr double kZMax = 1e5;
constexpr int kGrid = 2048;
constexpr double kStabilitySlack = 1e-9;

double golden_max(const SchemeSpec& scheme, double lambda, double a, double b) {
  const double gr = 0.6180339887498949;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = std::abs(stability_function_unchecked(scheme, c, lambda));
  double fd = std::abs(stability_function_unchecked(scheme, d, lambda));
  for (int it = 0; it < 80 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = std::abs(stability_function_unchecked(scheme, c, lambda));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = std::abs(stability_function_unchecked(scheme, d, lambda));
    }
  }
  return std::abs(stability_function_unchecked(scheme, 0.5 * (a + b), lambda));
}

}  // namespace

double stability_function(const SchemeSpec& scheme, double z, double lambda) {
  if (scheme.id == Scheme::erbe)
    throw std::invalid_argument("stability_function: erbe is not analyzed");
  if (z > 0.0)
    throw std::invalid_argument("stability_function: requires z <= 0");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("stability_function: requires lambda in [0,1]");
  return stability_function_unchecked(scheme, z, lambda);
}

double stability_tail_limit(const SchemeSpec& scheme, double lambda) {
  if (lambda == 0.0) {
    // A vanishes and every factor grows without bound along z -> -inf.
    switch (scheme.id) {
      case Scheme::bfe:
      case Scheme::imex2:
        return std::numeric_limits<double>::infinity();
      default:
        return std::numeric_limits<double>::infinity();
    }
  }
  const double lam = lambda;
  switch (scheme.id) {
    case Scheme::ee:
      return std::abs(1.0 - 1.0 / lam);
    case Scheme::erk2p2:
      return std::abs(1.0 - 1.0 / lam + (1.0 - lam) / (scheme.c2 * lam * lam));
    case Scheme::erk2p1:
      return std::abs(1.0 - 1.0 / lam +
                      (1.0 - lam) / (2.0 * scheme.c2 * lam * lam));
    case Scheme::le:
    case Scheme::l2a:
    case Scheme::l2b:
      return 0.0;  // exponential decay beats the polynomial factor
    case Scheme::sle:
    case Scheme::sl2:
      return 1.0;
    case Scheme::bfe:
      return (1.0 - lam) / lam;
    case Scheme::imex2:
      return std::abs(-1.0 + 2.0 * (1.0 - lam) * (1.0 - lam) / (lam * lam));
    case Scheme::erbe:
      break;
  }
  throw std::invalid_argument("stability_tail_limit: erbe is not analyzed");
}

double sup_abs_phi(const SchemeSpec& scheme, double lambda) {
  if (scheme.id == Scheme::erbe)
    throw std::invalid_argument("sup_abs_phi: erbe is not analyzed");
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("sup_abs_phi: requires lambda in [0,1]");

  std::vector<double> zs;
  zs.reserve(2 * kGrid + 1);
  for (int i = 0; i < kGrid; ++i) {
    const double e = -8.0 + (std::log10(kZMax) + 8.0) * i / (kGrid - 1);
    zs.push_back(-std::pow(10.0, e));
  }
  for (int i = 0; i <= kGrid; ++i)
    zs.push_back(-kZMax + kZMax * i / kGrid);
  std::sort(zs.begin(), zs.end());

  std::vector<double> vals(zs.size());
  for (size_t i = 0; i < zs.size(); ++i)
    vals[i] = std::abs(stability_function_unchecked(scheme, zs[i], lambda));

  double sup = *std::max_element(vals.begin(), vals.end());
  for (size_t i = 1; i + 1 < zs.size(); ++i) {
    if (vals[i] > vals[i - 1] && vals[i] > vals[i + 1])
      sup = std::max(sup, golden_max(scheme, lambda, zs[i - 1], zs[i + 1]));
  }
  return std::max(sup, stability_tail_limit(scheme, lambda));
}

double lambda_threshold(const SchemeSpec& scheme, double tol) {
  if (scheme.id == Scheme::erbe)
    throw std::invalid_argument("lambda_threshold: erbe is not analyzed");
  auto stable = [&](double lam) {
    return sup_abs_phi(scheme, lam) <= 1.0 + kStabilitySlack;
  };
  double hi = 1.0;
  if (!stable(hi))
    throw std::runtime_error(std::string("lambda_threshold: no stable lambda for ") +
                             scheme.name());
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (stable(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::pair<double, double> optimize_alpha_sl2() {
  const double gr = 0.6180339887498949;
  auto threshold = [](double alpha) {
    return lambda_threshold(SchemeSpec(Scheme::sl2, alpha), 1e-5);
  };
  double a = 1e-3, b = 1.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = threshold(c);
  double fd = threshold(d);
  while (b - a > 1e-3) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = threshold(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = threshold(d);
    }
  }
  const double alpha_star = 0.5 * (a + b);
  return {alpha_star, threshold(alpha_star)};
}

StabilityRaster astability_region(const SchemeSpec& scheme, double lambda,
                                  const RegionWindow& window, int width,
                                  int height) {
  if (scheme.id == Scheme::erbe)
    throw std::invalid_argument("astability_region: erbe is not analyzed");
  if (width <= 0 || height <= 0 || window.re_max <= window.re_min ||
      window.im_max <= window.im_min)
    throw std::invalid_argument("astability_region: window must have positive area");

  StabilityRaster r;
  r.width = width;
  r.height = height;
  r.window = window;
  r.inside.assign(size_t(width) * height, 0);

  auto fill_rows = [&](int y0, int y1) {
    for (int iy = y0; iy < y1; ++iy) {
      const double im =
          window.im_max - (window.im_max - window.im_min) * (iy + 0.5) / height;
      for (int ix = 0; ix < width; ++ix) {
        const double re =
            window.re_min + (window.re_max - window.re_min) * (ix + 0.5) / width;
        const std::complex<double> z(re, im);
        const double a =
            std::abs(stability_function_unchecked(scheme, z, lambda));
        r.inside[size_t(iy) * width + ix] = (a <= 1.0) ? 1 : 0;
      }
    }
  };

  const int nthreads = std::min(thread_count(), height);
  if (nthreads <= 1) {
    fill_rows(0, height);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      const int y0 = height * t / nthreads;
      const int y1 = height * (t + 1) / nthreads;
      pool.emplace_back(fill_rows, y0, y1);
    }
    for (auto& th : pool) th.join();
  }
  return r;
}

void write_pgm(const StabilityRaster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  for (unsigned char v : raster.inside) out.put(v ? char(255) : char(0));
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

}  // namespace expsplit
