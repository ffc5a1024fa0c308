#pragma once

#include <vector>

#include "aesop/autograd.hpp"

namespace aesop::ag {

// Elementwise arithmetic on equally shaped operands.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var add_scalar(const Var& a, double k);

/// a - s for a one-element s, broadcast over a.
Var sub_broadcast(const Var& a, const Var& s);
/// x[n,...] * s[n] for a per-sample factor s of shape [N].
Var scale_per_sample(const Var& x, const Var& s);

Var abs(const Var& a);
Var square(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var relu(const Var& a);
/// log(1 + exp(a)), numerically stable.
Var softplus(const Var& a);
/// a^p for non-negative a. The derivative at 0 is taken as 0.
Var pow(const Var& a, double p);

/// Reductions to shape [1].
Var sum(const Var& a);
Var mean(const Var& a);

/// Mean absolute (p = 1) or mean squared (p = 2) difference.
Var mean_lp(const Var& a, const Var& b, int p);

/// Weighted sum of one-element terms; used to assemble objectives.
Var weighted_sum(const std::vector<std::pair<double, Var>>& terms);

/// 2-D cross-correlation, zero padding. x [N,Ci,H,W], w [Co,Ci,K,K],
/// optional bias [Co].
Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int padding);

Var concat_channels(const std::vector<Var>& parts);
Var upsample_nearest(const Var& x, int factor);
Var pixel_unshuffle(const Var& x, int scale);
Var pixel_shuffle(const Var& x, int scale);

/// Sum over the channel axis, keeping it: [N,C,H,W] -> [N,1,H,W].
Var channel_sum(const Var& x);
/// Unbiased variance of each k x k window (reflect padding), same shape.
Var local_variance(const Var& x, int k);
/// Unbiased variance over all of C,H,W for each sample: [N,...] -> [N].
Var sample_variance(const Var& x);

/// W / sigma(W) with sigma estimated by one power-iteration step seeded by
/// `u` (length Co). When `update` is set, `u` is advanced in place. The
/// singular vectors are treated as constants in the backward pass.
Var spectral_normalize(const Var& w, Tensor& u, bool update);

}  // namespace aesop::ag
