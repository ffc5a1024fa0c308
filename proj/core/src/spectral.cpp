#include "aesop/spectral.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>
#include <fmt/format.h>

#include "aesop/errors.hpp"

namespace aesop {

namespace {

// FFTW's planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Aligned so FFTW picks the same codelets on every call.
using Spectrum = std::vector<std::complex<double>, AlignedAllocator<std::complex<double>>>;

Spectrum dft2(const double* plane, int h, int w, int sign) {
  Spectrum in(static_cast<std::size_t>(h) * w), out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = plane[i];
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  return out;
}

Spectrum idft2(Spectrum in, int h, int w) {
  Spectrum out(in.size());
  Plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  const double norm = 1.0 / (static_cast<double>(h) * w);
  for (auto& v : out) v *= norm;
  return out;
}

void check_cutoff(double cutoff) {
  if (!(cutoff > 0.0 && cutoff <= 0.5)) {
    throw DomainError(fmt::format("low-pass cutoff must be in (0, 0.5], got {}", cutoff));
  }
}

void require_unbatched(const ImageTensor& img, const char* what) {
  if (img.batched()) throw DimensionError(std::string(what) + " expects an unbatched image");
}

}  // namespace

double normalized_frequency(int k, int n) {
  const int signed_k = k < (n + 1) / 2 ? k : k - n;
  return static_cast<double>(signed_k) / n;
}

bool in_passband(double fy, double fx, double cutoff) {
  if (cutoff >= 0.5) return true;
  return std::sqrt(fy * fy + fx * fx) <= cutoff;
}

Tensor spectral_power(const ImageTensor& img) {
  require_unbatched(img, "spectral_power");
  if (img.channels() != 1) throw TypeError("spectral analysis expects a single-channel (Y) image");
  const int h = img.height(), w = img.width();
  const Spectrum f = dft2(img.tensor().data(), h, w, FFTW_FORWARD);
  Tensor out({h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int cy = (y + h / 2) % h, cx = (x + w / 2) % w;
      out[static_cast<std::size_t>(cy) * w + cx] = std::norm(f[static_cast<std::size_t>(y) * w + x]);
    }
  return out;
}

Tensor spectral_magnitude(const ImageTensor& img) {
  Tensor p = spectral_power(img);
  for (double& v : p.values()) v = std::log1p(std::sqrt(v));
  return p;
}

ImageTensor lowpass_filter(const ImageTensor& img, double cutoff) {
  check_cutoff(cutoff);
  require_unbatched(img, "lowpass_filter");
  const int c = img.channels(), h = img.height(), w = img.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out(img.tensor().shape());
  for (int ch = 0; ch < c; ++ch) {
    Spectrum f = dft2(img.tensor().data() + plane * ch, h, w, FFTW_FORWARD);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!in_passband(normalized_frequency(y, h), normalized_frequency(x, w), cutoff)) {
          f[static_cast<std::size_t>(y) * w + x] = 0.0;
        }
      }
    const Spectrum back = idft2(std::move(f), h, w);
    for (std::size_t i = 0; i < plane; ++i) out[plane * ch + i] = back[i].real();
  }
  return ImageTensor(std::move(out), img.color_space());
}

double high_frequency_energy(const ImageTensor& img, double cutoff) {
  check_cutoff(cutoff);
  require_unbatched(img, "high_frequency_energy");
  const int c = img.channels(), h = img.height(), w = img.width();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  double energy = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    const Spectrum f = dft2(img.tensor().data() + plane * ch, h, w, FFTW_FORWARD);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (!in_passband(normalized_frequency(y, h), normalized_frequency(x, w), cutoff)) {
          energy += std::norm(f[static_cast<std::size_t>(y) * w + x]);
        }
      }
  }
  return energy;
}

}  // namespace aesop
