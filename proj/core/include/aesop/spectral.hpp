#pragma once

#include "aesop/image.hpp"

namespace aesop {

/// Normalized frequency of DFT bin k in a length-n transform, in [-0.5, 0.5).
double normalized_frequency(int k, int n);

/// True when (fy, fx) lies in the pass band of the ideal circular low-pass
/// filter. A cutoff at Nyquist (0.5) passes every bin, corners included.
bool in_passband(double fy, double fx, double cutoff);

/// |F|^2 of the 2-D DFT of a single-channel image, zero frequency moved to
/// (H/2, W/2). Unnormalized forward transform, so sum = H*W*sum(x^2).
Tensor spectral_power(const ImageTensor& img);

/// log(1 + |F|) with zero frequency at the center. Requires a Y image.
Tensor spectral_magnitude(const ImageTensor& img);

/// Ideal circular low-pass applied per channel. cutoff in (0, 0.5].
ImageTensor lowpass_filter(const ImageTensor& img, double cutoff);

/// Spectral energy (sum |F|^2) outside the pass band, summed over channels.
double high_frequency_energy(const ImageTensor& img, double cutoff);

}  // namespace aesop
