#include "aesop/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <fmt/format.h>

#include "aesop/errors.hpp"
#include "aesop/image.hpp"

namespace aesop::ag {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

void accumulate(const NodePtr& node, const Tensor& g) {
  if (node->requires_grad) node->accumulate(g);
}

template <class F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out(a.shape());
  const double* src = a.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = f(src[i]);
  return out;
}

// grad_in[i] = grad_out[i] * dfdx(x[i])
template <class F>
Var unary(const Var& a, Tensor value, F derivative) {
  NodePtr an = a.node();
  return Var::from_op(std::move(value), {a}, [an, derivative](const Tensor& g) {
    Tensor gi(g.shape());
    const double* x = an->value.data();
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] = g[i] * derivative(x[i]);
    accumulate(an, gi);
  });
}

void require_rank4(const Tensor& t, const char* what) {
  if (t.rank() != 4) throw DimensionError(fmt::format("{} expects [N,C,H,W], got {}", what, to_string(t.shape())));
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

// Output columns [lo, hi) read input columns inside [0, w) for kernel tap kx.
void valid_columns(int w, int wo, int stride, int pad, int kx, int& lo, int& hi) {
  lo = std::clamp((pad - kx + stride - 1) / stride, 0, wo);
  const int last = w - 1 + pad - kx;
  hi = last < 0 ? lo : std::clamp(last / stride + 1, lo, wo);
}

// im2col for one sample: rows (ci,ky,kx), columns (oy,ox).
void im2col(const double* x, int ci, int h, int w, int k, int stride, int pad, int ho, int wo, double* col) {
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = col + (static_cast<std::size_t>((c * k + ky) * k + kx)) * ho * wo;
        const double* plane = x + static_cast<std::size_t>(c) * h * w;
        int lo, hi;
        valid_columns(w, wo, stride, pad, kx, lo, hi);
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * w - pad + kx;
          std::fill(dst, dst + lo, 0.0);
          if (stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) dst[ox] = src[ox * stride];
          }
          std::fill(dst + hi, dst + wo, 0.0);
        }
      }
}

void col2im(const double* col, int ci, int h, int w, int k, int stride, int pad, int ho, int wo, double* x) {
  for (int c = 0; c < ci; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const double* row = col + (static_cast<std::size_t>((c * k + ky) * k + kx)) * ho * wo;
        double* plane = x + static_cast<std::size_t>(c) * h * w;
        int lo, hi;
        valid_columns(w, wo, stride, pad, kx, lo, hi);
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const double* src = row + static_cast<std::size_t>(oy) * wo;
          double* dst = plane + static_cast<std::size_t>(iy) * w - pad + kx;
          for (int ox = lo; ox < hi; ++ox) dst[ox * stride] += src[ox];
        }
      }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return Var::from_op(std::move(out), {a, b}, [an, bn](const Tensor& g) {
    accumulate(an, g);
    accumulate(bn, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return Var::from_op(std::move(out), {a, b}, [an, bn](const Tensor& g) {
    accumulate(an, g);
    if (bn->requires_grad) bn->accumulate(map_values(g, [](double v) { return -v; }));
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return Var::from_op(std::move(out), {a, b}, [an, bn](const Tensor& g) {
    if (an->requires_grad) {
      Tensor ga(g.shape());
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] = g[i] * bn->value[i];
      an->accumulate(ga);
    }
    if (bn->requires_grad) {
      Tensor gb(g.shape());
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] = g[i] * an->value[i];
      bn->accumulate(gb);
    }
  });
}

Var scale(const Var& a, double k) {
  return unary(a, map_values(a.value(), [k](double v) { return k * v; }), [k](double) { return k; });
}

Var add_scalar(const Var& a, double k) {
  return unary(a, map_values(a.value(), [k](double v) { return v + k; }), [](double) { return 1.0; });
}

Var sub_broadcast(const Var& a, const Var& s) {
  if (s.size() != 1) throw DimensionError("sub_broadcast expects a one-element subtrahend");
  const double sv = s.value()[0];
  Tensor out = map_values(a.value(), [sv](double v) { return v - sv; });
  NodePtr an = a.node(), sn = s.node();
  return Var::from_op(std::move(out), {a, s}, [an, sn](const Tensor& g) {
    accumulate(an, g);
    if (sn->requires_grad) {
      double total = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) total += g[i];
      sn->accumulate(Tensor(sn->value.shape(), -total));
    }
  });
}

Var scale_per_sample(const Var& x, const Var& s) {
  const int n = x.value().dim(0);
  if (s.value().rank() != 1 || s.value().dim(0) != n) {
    throw DimensionError("scale_per_sample: factor must have shape [N]");
  }
  const std::size_t per = x.size() / static_cast<std::size_t>(n);
  Tensor out(x.shape());
  for (int b = 0; b < n; ++b)
    for (std::size_t i = 0; i < per; ++i) out[b * per + i] = x.value()[b * per + i] * s.value()[b];
  NodePtr xn = x.node(), sn = s.node();
  return Var::from_op(std::move(out), {x, s}, [xn, sn, n, per](const Tensor& g) {
    if (xn->requires_grad) {
      Tensor gx(g.shape());
      for (int b = 0; b < n; ++b)
        for (std::size_t i = 0; i < per; ++i) gx[b * per + i] = g[b * per + i] * sn->value[b];
      xn->accumulate(gx);
    }
    if (sn->requires_grad) {
      Tensor gs({n});
      for (int b = 0; b < n; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < per; ++i) acc += g[b * per + i] * xn->value[b * per + i];
        gs[b] = acc;
      }
      sn->accumulate(gs);
    }
  });
}

Var abs(const Var& a) {
  return unary(a, map_values(a.value(), [](double v) { return std::abs(v); }),
               [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var square(const Var& a) {
  return unary(a, map_values(a.value(), [](double v) { return v * v; }), [](double v) { return 2.0 * v; });
}

Var leaky_relu(const Var& a, double slope) {
  return unary(a, map_values(a.value(), [slope](double v) { return v > 0.0 ? v : slope * v; }),
               [slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Var relu(const Var& a) { return leaky_relu(a, 0.0); }

Var softplus(const Var& a) {
  return unary(a,
               map_values(a.value(),
                          [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }),
               [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Var pow(const Var& a, double p) {
  return unary(a, map_values(a.value(), [p](double v) { return std::pow(v, p); }),
               [p](double v) { return v == 0.0 ? 0.0 : p * std::pow(v, p - 1.0); });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  NodePtr an = a.node();
  return Var::from_op(Tensor({1}, total), {a},
                      [an](const Tensor& g) { accumulate(an, Tensor(an->value.shape(), g[0])); });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.size());
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  NodePtr an = a.node();
  return Var::from_op(Tensor({1}, total / n), {a},
                      [an, n](const Tensor& g) { accumulate(an, Tensor(an->value.shape(), g[0] / n)); });
}

Var mean_lp(const Var& a, const Var& b, int p) {
  if (p == 1) return mean(abs(sub(a, b)));
  if (p == 2) return mean(square(sub(a, b)));
  throw DomainError(fmt::format("unsupported norm p = {}", p));
}

Var weighted_sum(const std::vector<std::pair<double, Var>>& terms) {
  double total = 0.0;
  std::vector<Var> inputs;
  std::vector<double> weights;
  for (const auto& [w, v] : terms) {
    if (v.size() != 1) throw DimensionError("weighted_sum terms must be scalars");
    total += w * v.item();
    inputs.push_back(v);
    weights.push_back(w);
  }
  std::vector<NodePtr> nodes;
  for (const auto& v : inputs) nodes.push_back(v.node());
  return Var::from_op(Tensor({1}, total), inputs, [nodes, weights](const Tensor& g) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (weights[i] != 0.0) accumulate(nodes[i], Tensor({1}, weights[i] * g[0]));
    }
  });
}

Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int padding) {
  require_rank4(x.value(), "conv2d input");
  require_rank4(w.value(), "conv2d weight");
  const int n = x.value().dim(0), ci = x.value().dim(1), h = x.value().dim(2), wd = x.value().dim(3);
  const int co = w.value().dim(0), k = w.value().dim(2);
  if (w.value().dim(1) != ci || w.value().dim(3) != k) {
    throw DimensionError(fmt::format("conv2d: weight {} does not match input {}", to_string(w.shape()),
                                     to_string(x.shape())));
  }
  if (bias.defined() && (bias.value().rank() != 1 || bias.value().dim(0) != co)) {
    throw DimensionError("conv2d: bias must have shape [Co]");
  }
  const int ho = (h + 2 * padding - k) / stride + 1;
  const int wo = (wd + 2 * padding - k) / stride + 1;
  if (ho < 1 || wo < 1) throw DimensionError("conv2d: input smaller than kernel");
  const int rows = ci * k * k;
  const int cols = ho * wo;

  Tensor out({n, co, ho, wo});
  AlignedBuffer col(static_cast<std::size_t>(rows) * cols);
  ConstMatMap wm(w.value().data(), co, rows);
  for (int b = 0; b < n; ++b) {
    im2col(x.value().data() + static_cast<std::size_t>(b) * ci * h * wd, ci, h, wd, k, stride, padding, ho, wo,
           col.data());
    MatMap om(out.data() + static_cast<std::size_t>(b) * co * cols, co, cols);
    om.noalias() = wm * ConstMatMap(col.data(), rows, cols);
    if (bias.defined()) {
      for (int c = 0; c < co; ++c) om.row(c).array() += bias.value()[c];
    }
  }

  NodePtr xn = x.node(), wn = w.node();
  NodePtr bn = bias.defined() ? bias.node() : nullptr;
  std::vector<Var> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return Var::from_op(std::move(out), inputs, [=](const Tensor& g) {
    const bool need_x = xn->requires_grad;
    const bool need_w = wn->requires_grad;
    const bool need_b = bn && bn->requires_grad;
    Tensor gx = need_x ? Tensor(xn->value.shape()) : Tensor();
    Tensor gw = need_w ? Tensor(wn->value.shape()) : Tensor();
    Tensor gb = need_b ? Tensor({co}) : Tensor();
    AlignedBuffer colbuf(static_cast<std::size_t>(rows) * cols);
    AlignedBuffer dcol(need_x ? colbuf.size() : 0);
    ConstMatMap wmat(wn->value.data(), co, rows);
    for (int b = 0; b < n; ++b) {
      ConstMatMap gm(g.data() + static_cast<std::size_t>(b) * co * cols, co, cols);
      if (need_w) {
        im2col(xn->value.data() + static_cast<std::size_t>(b) * ci * h * wd, ci, h, wd, k, stride, padding, ho,
               wo, colbuf.data());
        MatMap(gw.data(), co, rows).noalias() += gm * ConstMatMap(colbuf.data(), rows, cols).transpose();
      }
      if (need_b) {
        for (int c = 0; c < co; ++c) gb[c] += gm.row(c).sum();
      }
      if (need_x) {
        MatMap(dcol.data(), rows, cols).noalias() = wmat.transpose() * gm;
        col2im(dcol.data(), ci, h, wd, k, stride, padding, ho, wo,
               gx.data() + static_cast<std::size_t>(b) * ci * h * wd);
      }
    }
    if (need_x) xn->accumulate(gx);
    if (need_w) wn->accumulate(gw);
    if (need_b) bn->accumulate(gb);
  });
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_channels of nothing");
  const Tensor& first = parts.front().value();
  require_rank4(first, "concat_channels");
  const int n = first.dim(0), h = first.dim(2), w = first.dim(3);
  int total_c = 0;
  for (const auto& p : parts) {
    const Tensor& t = p.value();
    if (t.rank() != 4 || t.dim(0) != n || t.dim(2) != h || t.dim(3) != w) {
      throw DimensionError("concat_channels: incompatible shapes");
    }
    total_c += t.dim(1);
  }
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out({n, total_c, h, w});
  for (int b = 0; b < n; ++b) {
    double* dst = out.data() + static_cast<std::size_t>(b) * total_c * plane;
    for (const auto& p : parts) {
      const std::size_t len = static_cast<std::size_t>(p.value().dim(1)) * plane;
      const double* src = p.value().data() + b * len;
      std::copy(src, src + len, dst);
      dst += len;
    }
  }
  std::vector<NodePtr> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return Var::from_op(std::move(out), parts, [nodes, n, total_c, plane](const Tensor& g) {
    std::size_t offset_c = 0;
    for (const auto& node : nodes) {
      const int c = node->value.dim(1);
      if (node->requires_grad) {
        Tensor gi(node->value.shape());
        for (int b = 0; b < n; ++b) {
          const double* src = g.data() + (static_cast<std::size_t>(b) * total_c + offset_c) * plane;
          std::copy(src, src + c * plane, gi.data() + static_cast<std::size_t>(b) * c * plane);
        }
        node->accumulate(gi);
      }
      offset_c += static_cast<std::size_t>(c);
    }
  });
}

Var upsample_nearest(const Var& x, int f) {
  require_rank4(x.value(), "upsample_nearest");
  const int n = x.value().dim(0), c = x.value().dim(1), h = x.value().dim(2), w = x.value().dim(3);
  Tensor out({n, c, h * f, w * f});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h * f; ++y)
        for (int xx = 0; xx < w * f; ++xx) out.at(b, ch, y, xx) = x.value().at(b, ch, y / f, xx / f);
  NodePtr xn = x.node();
  return Var::from_op(std::move(out), {x}, [xn, n, c, h, w, f](const Tensor& g) {
    Tensor gi({n, c, h, w});
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h * f; ++y)
          for (int xx = 0; xx < w * f; ++xx) gi.at(b, ch, y / f, xx / f) += g.at(b, ch, y, xx);
    xn->accumulate(gi);
  });
}

Var pixel_unshuffle(const Var& x, int s) {
  NodePtr xn = x.node();
  return Var::from_op(aesop::pixel_unshuffle(x.value(), s), {x},
                      [xn, s](const Tensor& g) { xn->accumulate(aesop::pixel_shuffle(g, s)); });
}

Var pixel_shuffle(const Var& x, int s) {
  NodePtr xn = x.node();
  return Var::from_op(aesop::pixel_shuffle(x.value(), s), {x},
                      [xn, s](const Tensor& g) { xn->accumulate(aesop::pixel_unshuffle(g, s)); });
}

Var channel_sum(const Var& x) {
  require_rank4(x.value(), "channel_sum");
  const int n = x.value().dim(0), c = x.value().dim(1), h = x.value().dim(2), w = x.value().dim(3);
  Tensor out({n, 1, h, w});
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) out.at(b, 0, y, xx) += x.value().at(b, ch, y, xx);
  NodePtr xn = x.node();
  return Var::from_op(std::move(out), {x}, [xn, n, c, h, w](const Tensor& g) {
    Tensor gi(xn->value.shape());
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
          for (int xx = 0; xx < w; ++xx) gi.at(b, ch, y, xx) = g.at(b, 0, y, xx);
    xn->accumulate(gi);
  });
}

Var local_variance(const Var& x, int k) {
  require_rank4(x.value(), "local_variance");
  if (k < 2) throw DomainError("local_variance window must be at least 2");
  const int n = x.value().dim(0), c = x.value().dim(1), h = x.value().dim(2), w = x.value().dim(3);
  const int r = k / 2;
  const double count = static_cast<double>(k) * k;
  Tensor out(x.shape());
  Tensor window_mean(x.shape());
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
          double s = 0.0, s2 = 0.0;
          for (int dy = -r; dy < k - r; ++dy)
            for (int dx = -r; dx < k - r; ++dx) {
              const double v = x.value().at(b, ch, reflect_index(y + dy, h), reflect_index(xx + dx, w));
              s += v;
              s2 += v * v;
            }
          const double m = s / count;
          window_mean.at(b, ch, y, xx) = m;
          out.at(b, ch, y, xx) = (s2 - s * m) / (count - 1.0);
        }
  NodePtr xn = x.node();
  return Var::from_op(std::move(out), {x}, [xn, window_mean, n, c, h, w, k, r, count](const Tensor& g) {
    Tensor gi(xn->value.shape());
    for (int b = 0; b < n; ++b)
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
          for (int xx = 0; xx < w; ++xx) {
            const double gp = g.at(b, ch, y, xx) * 2.0 / (count - 1.0);
            if (gp == 0.0) continue;
            const double m = window_mean.at(b, ch, y, xx);
            for (int dy = -r; dy < k - r; ++dy)
              for (int dx = -r; dx < k - r; ++dx) {
                const int sy = reflect_index(y + dy, h), sx = reflect_index(xx + dx, w);
                gi.at(b, ch, sy, sx) += gp * (xn->value.at(b, ch, sy, sx) - m);
              }
          }
    xn->accumulate(gi);
  });
}

Var sample_variance(const Var& x) {
  const int n = x.value().dim(0);
  const std::size_t per = x.size() / static_cast<std::size_t>(n);
  if (per < 2) throw DimensionError("sample_variance needs at least two elements per sample");
  Tensor out({n});
  Tensor means({n});
  for (int b = 0; b < n; ++b) {
    const double* v = x.value().data() + b * per;
    double m = 0.0;
    for (std::size_t i = 0; i < per; ++i) m += v[i];
    m /= static_cast<double>(per);
    double acc = 0.0;
    for (std::size_t i = 0; i < per; ++i) acc += (v[i] - m) * (v[i] - m);
    means[b] = m;
    out[b] = acc / static_cast<double>(per - 1);
  }
  NodePtr xn = x.node();
  return Var::from_op(std::move(out), {x}, [xn, means, n, per](const Tensor& g) {
    Tensor gi(xn->value.shape());
    for (int b = 0; b < n; ++b) {
      const double f = 2.0 * g[b] / static_cast<double>(per - 1);
      for (std::size_t i = 0; i < per; ++i) gi[b * per + i] = f * (xn->value[b * per + i] - means[b]);
    }
    xn->accumulate(gi);
  });
}

Var spectral_normalize(const Var& w, Tensor& u, bool update) {
  const int co = w.value().dim(0);
  const int m = static_cast<int>(w.size()) / co;
  if (u.size() != static_cast<std::size_t>(co)) throw DimensionError("spectral_normalize: u must have length Co");
  ConstMatMap wm(w.value().data(), co, m);
  Eigen::Map<Eigen::VectorXd> uv(u.data(), co);
  Eigen::VectorXd v = wm.transpose() * uv;
  v /= std::max(v.norm(), 1e-12);
  if (update) {
    Eigen::VectorXd nu = wm * v;
    uv = nu / std::max(nu.norm(), 1e-12);
  }
  const Eigen::VectorXd u_fixed = uv;
  const double sigma = u_fixed.dot(wm * v);

  Tensor out(w.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.value()[i] / sigma;
  NodePtr wn = w.node();
  return Var::from_op(std::move(out), {w}, [wn, u_fixed, v, sigma, co, m](const Tensor& g) {
    double inner = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * wn->value[i];
    Tensor gi(g.shape());
    const double c2 = inner / (sigma * sigma);
    for (int r = 0; r < co; ++r)
      for (int j = 0; j < m; ++j) {
        const std::size_t i = static_cast<std::size_t>(r) * m + j;
        gi[i] = g[i] / sigma - c2 * u_fixed[r] * v[j];
      }
    wn->accumulate(gi);
  });
}

}  // namespace aesop::ag
