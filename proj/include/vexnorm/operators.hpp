#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vexnorm/detail/numeric.hpp"
#include "vexnorm/error.hpp"
#include "vexnorm/grid.hpp"

namespace vexnorm {

enum class Engine { direct, fft };

inline std::string to_string(Engine e) { return e == Engine::direct ? "direct" : "fft"; }

/// Weights of the Riesz kernel |x - y|^{beta - n} against each source cell,
/// indexed by the absolute lattice offset between target and source.
///
/// n = 1: every weight is the exact integral of |t|^{beta-1} over the source
/// cell, so piecewise-constant data aligned with the cells is integrated
/// exactly. The diagonal weight is 2 (h/2)^beta / beta.
///
/// n = 2: the diagonal weight is the exact integral over the inscribed disk
/// plus a midpoint rule on the rest of the cell; cells within three lattice
/// steps use a subcell midpoint rule, farther cells the plain midpoint rule.
class RieszKernel {
 public:
  RieszKernel(const DyadicGrid& grid, double beta)
      : n_(grid.dimension()), beta_(beta), extent_(grid.lattice_extent()) {
    if (!(beta > 0.0) || !(beta < static_cast<double>(n_)))
      throw ArgumentError("beta = " + std::to_string(beta) + " outside (0, n) = (0, " +
                          std::to_string(n_) + ")");
    const double h = grid.spacing();
    if (n_ == 1) {
      weights_.resize(static_cast<std::size_t>(extent_));
      const double hb = std::pow(h, beta);
      weights_[0] = 2.0 * std::pow(0.5 * h, beta) / beta;
      for (std::int64_t d = 1; d < extent_; ++d) {
        // (d + 1/2)^beta - (d - 1/2)^beta without cancellation.
        const double dd = static_cast<double>(d);
        const double u = 0.5 / dd;
        const double diff = std::expm1(beta * std::log1p(u)) - std::expm1(beta * std::log1p(-u));
        weights_[d] = hb * std::pow(dd, beta) * diff / beta;
      }
      return;
    }
    weights_.resize(static_cast<std::size_t>(extent_ * extent_));
    const double area = h * h;
    for (std::int64_t dy = 0; dy < extent_; ++dy)
      for (std::int64_t dx = 0; dx < extent_; ++dx) {
        double w;
        if (dx == 0 && dy == 0) {
          w = diagonal_2d(h);
        } else if (std::max(dx, dy) <= 3) {
          w = subcell_midpoint_2d(h, static_cast<double>(dx), static_cast<double>(dy), 16);
        } else {
          const double r = h * std::hypot(static_cast<double>(dx), static_cast<double>(dy));
          w = std::pow(r, beta - 2.0) * area;
        }
        weights_[static_cast<std::size_t>(dx + extent_ * dy)] = w;
      }
  }

  int dimension() const { return n_; }
  double beta() const { return beta_; }
  std::int64_t extent() const { return extent_; }
  double operator()(std::int64_t dx, std::int64_t dy = 0) const {
    dx = dx < 0 ? -dx : dx;
    dy = dy < 0 ? -dy : dy;
    return weights_[static_cast<std::size_t>(dx + extent_ * dy)];
  }

 private:
  double diagonal_2d(double h) const {
    const double disk = 2.0 * std::numbers::pi * std::pow(0.5 * h, beta_) / beta_;
    constexpr int kSub = 32;
    const double sub = h / kSub;
    double sum = 0.0;
    int outside = 0;
    for (int a = 0; a < kSub; ++a)
      for (int b = 0; b < kSub; ++b) {
        const double x = -0.5 * h + (a + 0.5) * sub;
        const double y = -0.5 * h + (b + 0.5) * sub;
        const double r = std::hypot(x, y);
        if (r < 0.5 * h) continue;
        sum += std::pow(r, beta_ - 2.0);
        ++outside;
      }
    const double remainder_area = h * h * (1.0 - std::numbers::pi / 4.0);
    return disk + sum * remainder_area / outside;
  }

  double subcell_midpoint_2d(double h, double dx, double dy, int sub) const {
    const double s = h / sub;
    double sum = 0.0;
    for (int a = 0; a < sub; ++a)
      for (int b = 0; b < sub; ++b) {
        const double x = (dx - 0.5) * h + (a + 0.5) * s;
        const double y = (dy - 0.5) * h + (b + 0.5) * s;
        sum += std::pow(std::hypot(x, y), beta_ - 2.0);
      }
    return sum * s * s;
  }

  int n_;
  double beta_;
  std::int64_t extent_;
  std::vector<double> weights_;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw ResourceError("fftw_malloc failed");
  return FftwBuffer<T>(p);
}

// Linear convolution of lattice data with the kernel, evaluated on the
// lattice, through a zero-padded circular convolution of period 2M per axis.
inline std::vector<double> fft_convolve(const DyadicGrid& grid, const RieszKernel& kernel,
                                        std::span<const double> values) {
  const int n = grid.dimension();
  const std::int64_t M = grid.lattice_extent();
  const std::int64_t P = 2 * M;
  const std::size_t real_size = static_cast<std::size_t>(n == 1 ? P : P * P);
  const std::size_t complex_size = static_cast<std::size_t>(n == 1 ? P / 2 + 1 : P * (P / 2 + 1));

  auto data = fftw_buffer<double>(real_size);
  auto kern = fftw_buffer<double>(real_size);
  auto data_hat = fftw_buffer<fftw_complex>(complex_size);
  auto kern_hat = fftw_buffer<fftw_complex>(complex_size);
  std::fill_n(data.get(), real_size, 0.0);
  std::fill_n(kern.get(), real_size, 0.0);

  auto wrap = [P](std::int64_t d) { return d >= 0 ? d : P + d; };
  if (n == 1) {
    for (std::int64_t d = -(M - 1); d < M; ++d) kern[wrap(d)] = kernel(d);
  } else {
    for (std::int64_t dy = -(M - 1); dy < M; ++dy)
      for (std::int64_t dx = -(M - 1); dx < M; ++dx) kern[wrap(dx) + P * wrap(dy)] = kernel(dx, dy);
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    const auto [i, j] = grid.lattice_coords(c);
    data[static_cast<std::size_t>(i + P * j)] = values[c];
  }

  fftw_plan fwd_data, fwd_kern, inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    if (n == 1) {
      fwd_data = fftw_plan_dft_r2c_1d(static_cast<int>(P), data.get(), data_hat.get(), FFTW_ESTIMATE);
      fwd_kern = fftw_plan_dft_r2c_1d(static_cast<int>(P), kern.get(), kern_hat.get(), FFTW_ESTIMATE);
      inverse = fftw_plan_dft_c2r_1d(static_cast<int>(P), data_hat.get(), data.get(), FFTW_ESTIMATE);
    } else {
      const int p = static_cast<int>(P);
      fwd_data = fftw_plan_dft_r2c_2d(p, p, data.get(), data_hat.get(), FFTW_ESTIMATE);
      fwd_kern = fftw_plan_dft_r2c_2d(p, p, kern.get(), kern_hat.get(), FFTW_ESTIMATE);
      inverse = fftw_plan_dft_c2r_2d(p, p, data_hat.get(), data.get(), FFTW_ESTIMATE);
    }
  }
  fftw_execute(fwd_data);
  fftw_execute(fwd_kern);
  for (std::size_t k = 0; k < complex_size; ++k) {
    const double ar = data_hat[k][0], ai = data_hat[k][1];
    const double br = kern_hat[k][0], bi = kern_hat[k][1];
    data_hat[k][0] = ar * br - ai * bi;
    data_hat[k][1] = ar * bi + ai * br;
  }
  fftw_execute(inverse);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_data);
    fftw_destroy_plan(fwd_kern);
    fftw_destroy_plan(inverse);
  }

  const double scale = 1.0 / static_cast<double>(real_size);
  std::vector<double> out(values.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto [i, j] = grid.lattice_coords(c);
    out[c] = data[static_cast<std::size_t>(i + P * j)] * scale;
  }
  return out;
}

struct Source {
  std::int64_t i, j;
  double value;
  std::size_t cell;
};

inline std::vector<Source> nonzero_sources(const DyadicGrid& grid, std::span<const double> values) {
  std::vector<Source> out;
  for (std::size_t c = 0; c < values.size(); ++c)
    if (values[c] != 0.0) {
      const auto [i, j] = grid.lattice_coords(c);
      out.push_back({i, j, values[c], c});
    }
  return out;
}

inline std::vector<double> direct_convolve(const DyadicGrid& grid, const RieszKernel& kernel,
                                           std::span<const double> values) {
  const auto sources = nonzero_sources(grid, values);
  std::vector<double> out(values.size(), 0.0);
  parallel_for(out.size(), [&](std::size_t c) {
    const auto [i, j] = grid.lattice_coords(c);
    double s = 0.0;
    for (const auto& src : sources) s += src.value * kernel(i - src.i, j - src.j);
    out[c] = s;
  });
  return out;
}

}  // namespace detail

/// Fractional integral I_beta f(x) = integral f(y) |x - y|^{beta - n} dy over
/// the sources inside the grid.
inline GridFunction fractional_integral(const GridFunction& f, double beta, Engine engine = Engine::fft) {
  const RieszKernel kernel(f.grid(), beta);
  auto out = engine == Engine::direct ? detail::direct_convolve(f.grid(), kernel, f.values())
                                      : detail::fft_convolve(f.grid(), kernel, f.values());
  return {f.grid_ptr(), std::move(out)};
}

/// I_beta f at an arbitrary point, integrating the kernel exactly over each
/// source cell (n = 1) or with the subcell rule (n = 2).
inline double fractional_integral_at(const GridFunction& f, double beta, const Point& x) {
  const auto& grid = f.grid();
  const int n = grid.dimension();
  if (!(beta > 0.0) || !(beta < static_cast<double>(n)))
    throw ArgumentError("beta outside (0, n)");
  const double h = grid.spacing();
  const auto centers = grid.centers();
  double s = 0.0;
  if (n == 1) {
    auto F = [beta](double u) { return (u < 0 ? -1.0 : 1.0) * std::pow(std::abs(u), beta) / beta; };
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (f[c] == 0.0) continue;
      const double a = centers[c][0] - 0.5 * h - x[0];
      s += f[c] * (F(a + h) - F(a));
    }
    return s;
  }
  constexpr int kSub = 16;
  const double sub = h / kSub;
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (f[c] == 0.0) continue;
    double w = 0.0;
    for (int a = 0; a < kSub; ++a)
      for (int b = 0; b < kSub; ++b) {
        const double px = centers[c][0] - 0.5 * h + (a + 0.5) * sub - x[0];
        const double py = centers[c][1] - 0.5 * h + (b + 0.5) * sub - x[1];
        w += std::pow(std::hypot(px, py), beta - 2.0);
      }
    s += f[c] * w * sub * sub;
  }
  return s;
}

/// Parameters of the m-order commutator I^m_{beta,b}.
struct FracIntegralSpec {
  double beta = 0.5;
  int m = 0;
  std::optional<GridFunction> symbol;
  Engine engine = Engine::direct;

  void validate(int n) const {
    if (!(beta > 0.0) || !(beta < static_cast<double>(n)))
      throw ArgumentError("beta = " + std::to_string(beta) + " outside (0, n) = (0, " +
                          std::to_string(n) + ")");
    if (m < 0) throw ArgumentError("commutator order m must be >= 0");
    if (m >= 1 && !symbol) throw ArgumentError("commutator of order m >= 1 needs a symbol b");
  }
};

/// I^m_{beta,b} f(x) = integral f(y) (b(x) - b(y))^m |x - y|^{beta - n} dy.
/// m = 0 is exactly fractional_integral. For m = 1 the fft engine uses
/// b I_beta f - I_beta(b f); m >= 2 is always evaluated directly.
inline GridFunction commutator(const GridFunction& f, const FracIntegralSpec& spec) {
  const auto& grid = f.grid();
  spec.validate(grid.dimension());
  if (spec.m == 0) return fractional_integral(f, spec.beta, spec.engine);
  const GridFunction& b = *spec.symbol;
  if (b.size() != f.size()) throw ArgumentError("symbol and function live on different grids");
  if (spec.m == 1 && spec.engine == Engine::fft) {
    return b * fractional_integral(f, spec.beta, Engine::fft) -
           fractional_integral(b * f, spec.beta, Engine::fft);
  }
  const RieszKernel kernel(grid, spec.beta);
  const auto sources = detail::nonzero_sources(grid, f.values());
  const int m = spec.m;
  std::vector<double> out(f.size(), 0.0);
  detail::parallel_for(out.size(), [&](std::size_t c) {
    const auto [i, j] = grid.lattice_coords(c);
    const double bx = b[c];
    double s = 0.0;
    for (const auto& src : sources)
      s += src.value * detail::int_pow(bx - b[src.cell], m) * kernel(i - src.i, j - src.j);
    out[c] = s;
  });
  return {f.grid_ptr(), std::move(out)};
}

namespace detail {

inline std::vector<double> maximal_radii(const DyadicGrid& grid) {
  const int levels = grid.k_max() - grid.k_min() + grid.level();
  std::vector<double> r;
  for (int j = 0; j <= levels; ++j) r.push_back(std::ldexp(grid.spacing(), j));
  return r;
}

}  // namespace detail

/// Mf(x) = max over r = 2^j h, j = 0..(k_max - k_min + level), of
/// r^{-n} integral_{|y - x| < r} |f(y)| dy.
inline GridFunction maximal(const GridFunction& f) {
  const auto& grid = f.grid();
  const std::int64_t M = grid.lattice_extent();
  const double mu = grid.cell_measure();
  const auto radii = detail::maximal_radii(grid);
  const int n = grid.dimension();
  const std::int64_t rows = n == 1 ? 1 : M;

  // Row prefix sums of |f| mu over the full lattice.
  std::vector<double> prefix(static_cast<std::size_t>(rows * (M + 1)), 0.0);
  {
    std::vector<double> lattice(static_cast<std::size_t>(rows * M), 0.0);
    for (std::size_t c = 0; c < f.size(); ++c) lattice[grid.lattice_index(c)] = std::abs(f[c]) * mu;
    for (std::int64_t j = 0; j < rows; ++j)
      for (std::int64_t i = 0; i < M; ++i)
        prefix[j * (M + 1) + i + 1] = prefix[j * (M + 1) + i] + lattice[j * M + i];
  }
  auto row_sum = [&](std::int64_t j, std::int64_t lo, std::int64_t hi) {
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, M - 1);
    if (lo > hi) return 0.0;
    return prefix[j * (M + 1) + hi + 1] - prefix[j * (M + 1) + lo];
  };

  std::vector<double> out(f.size(), 0.0);
  detail::parallel_for(out.size(), [&](std::size_t c) {
    const auto [ci, cj] = grid.lattice_coords(c);
    double best = 0.0;
    for (std::size_t t = 0; t < radii.size(); ++t) {
      // Lattice offsets with |d| h < r = 2^t h.
      const std::int64_t W = std::int64_t{1} << t;
      double mass = 0.0;
      if (n == 1) {
        mass = row_sum(0, ci - (W - 1), ci + (W - 1));
      } else {
        const std::int64_t reach = std::min(W - 1, M);
        for (std::int64_t dy = -reach; dy <= reach; ++dy) {
          const std::int64_t row = cj + dy;
          if (row < 0 || row >= M) continue;
          const std::int64_t rem = W * W - dy * dy - 1;
          auto dx = static_cast<std::int64_t>(std::sqrt(static_cast<double>(rem)));
          while (dx * dx > rem) --dx;
          while ((dx + 1) * (dx + 1) <= rem) ++dx;
          mass += row_sum(row, ci - dx, ci + dx);
        }
      }
      best = std::max(best, mass / std::pow(radii[t], n));
      if (W - 1 >= 2 * M) break;  // the ball already covers the lattice
    }
    out[c] = best;
  });
  return {f.grid_ptr(), std::move(out)};
}

/// Mf at an arbitrary point, same dyadic radii and normalization as maximal().
inline double maximal_at(const GridFunction& f, const Point& x) {
  const auto& grid = f.grid();
  const auto centers = grid.centers();
  const double mu = grid.cell_measure();
  const int n = grid.dimension();
  double best = 0.0;
  for (double r : detail::maximal_radii(grid)) {
    double mass = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c) {
      const double dx = centers[c][0] - x[0], dy = centers[c][1] - x[1];
      if (dx * dx + dy * dy < r * r) mass += std::abs(f[c]) * mu;
    }
    best = std::max(best, mass / std::pow(r, n));
  }
  return best;
}

}  // namespace vexnorm
