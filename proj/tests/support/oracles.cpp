#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unistd.h>

namespace aesop::testing {

namespace fs = std::filesystem;

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace

double keys_kernel(double x, double a) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

std::vector<double> direct_bicubic_down(const std::vector<double>& plane, int h, int w, int s, double a) {
  const int oh = h / s, ow = w / s;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  const int reach = 2 * s + 1;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const double cy = (oy + 0.5) * s - 0.5;
      const double cx = (ox + 0.5) * s - 0.5;
      double acc = 0.0, norm = 0.0;
      for (int y = static_cast<int>(std::floor(cy)) - reach; y <= static_cast<int>(std::ceil(cy)) + reach; ++y)
        for (int x = static_cast<int>(std::floor(cx)) - reach; x <= static_cast<int>(std::ceil(cx)) + reach; ++x) {
          const double wgt = keys_kernel((cy - y) / s, a) * keys_kernel((cx - x) / s, a);
          acc += wgt * plane[static_cast<std::size_t>(reflect(y, h)) * w + reflect(x, w)];
          norm += wgt;
        }
      out[static_cast<std::size_t>(oy) * ow + ox] = acc / norm;
    }
  return out;
}

std::vector<double> direct_bicubic_up(const std::vector<double>& plane, int h, int w, int s, double a) {
  const int oh = h * s, ow = w * s;
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox) {
      const double cy = (oy + 0.5) / s - 0.5;
      const double cx = (ox + 0.5) / s - 0.5;
      double acc = 0.0, norm = 0.0;
      for (int y = static_cast<int>(std::floor(cy)) - 2; y <= static_cast<int>(std::floor(cy)) + 3; ++y)
        for (int x = static_cast<int>(std::floor(cx)) - 2; x <= static_cast<int>(std::floor(cx)) + 3; ++x) {
          const double wgt = keys_kernel(cy - y, a) * keys_kernel(cx - x, a);
          acc += wgt * plane[static_cast<std::size_t>(reflect(y, h)) * w + reflect(x, w)];
          norm += wgt;
        }
      out[static_cast<std::size_t>(oy) * ow + ox] = acc / norm;
    }
  return out;
}

double windowed_ssim(const std::vector<double>& x, const std::vector<double>& y, int h, int w) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  double g[kWin][kWin];
  double gsum = 0.0;
  for (int i = 0; i < kWin; ++i)
    for (int j = 0; j < kWin; ++j) {
      const double di = i - 5, dj = j - 5;
      g[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      gsum += g[i][j];
    }
  double total = 0.0;
  int count = 0;
  for (int top = 0; top + kWin <= h; ++top)
    for (int left = 0; left + kWin <= w; ++left) {
      double mx = 0, my = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const std::size_t k = static_cast<std::size_t>(top + i) * w + left + j;
          mx += g[i][j] / gsum * x[k];
          my += g[i][j] / gsum * y[k];
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
          const std::size_t k = static_cast<std::size_t>(top + i) * w + left + j;
          vx += g[i][j] / gsum * (x[k] - mx) * (x[k] - mx);
          vy += g[i][j] / gsum * (y[k] - my) * (y[k] - my);
          cxy += g[i][j] / gsum * (x[k] - mx) * (y[k] - my);
        }
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

std::vector<double> luma_plane(const ImageTensor& rgb) {
  const int h = rgb.height(), w = rgb.width();
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] =
          0.299 * rgb.at(0, y, x) + 0.587 * rgb.at(1, y, x) + 0.114 * rgb.at(2, y, x);
    }
  return out;
}

ImageTensor random_image(int channels, int height, int width, std::uint64_t seed) {
  return ImageTensor(random_tensor({channels, height, width}, seed, 0.0, 1.0),
                     channels == 1 ? ColorSpace::kY : ColorSpace::kRGB);
}

Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

double central_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, std::size_t index,
                          double eps) {
  Tensor plus = x, minus = x;
  plus[index] += eps;
  minus[index] -= eps;
  return (f(plus) - f(minus)) / (2.0 * eps);
}

GradientCheck check_gradient(const std::function<ag::Var(const ag::Var&)>& loss, const Tensor& x, int samples,
                             std::uint64_t seed, double eps) {
  ag::Var leaf(x, true);
  ag::backward(loss(leaf));
  const Tensor analytic = leaf.grad();
  const auto value = [&](const Tensor& t) {
    ag::NoGradGuard guard;
    return loss(ag::Var(t)).item();
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  GradientCheck result;
  for (int i = 0; i < samples; ++i) {
    const std::size_t k = pick(rng);
    const double numeric = central_difference(value, x, k, eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-8});
    result.max_rel_error = std::max(result.max_rel_error, std::abs(numeric - analytic[k]) / denom);
    result.max_abs_grad = std::max(result.max_abs_grad, std::abs(analytic[k]));
  }
  return result;
}

ScratchDir::ScratchDir(const std::string& tag) {
  path_ = fs::temp_directory_path() / ("aesop_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace aesop::testing
