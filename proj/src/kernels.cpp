// Copyright 2026 The y4k Authors.
// SPDX-License-Identifier: Apache-2.0

#include "y4k/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "y4k/parallel.hpp"

namespace y4k {
namespace {

std::string dims(const Shape4& s) { return s.str(); }

void require_same_shape(const Shape4& a, const Shape4& b, const char* op) {
  if (a != b) throw ShapeError(std::string(op) + ": shape mismatch " + dims(a) + " vs " + dims(b));
}

void require_length(std::size_t got, std::int64_t want, const char* what) {
  if (static_cast<std::int64_t>(got) != want) {
    throw ShapeError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                     std::to_string(want));
  }
}

// First and one-past-last output column whose input column
// ox*stride - pad + k lies inside [0, in).
std::pair<std::int64_t, std::int64_t> valid_range(std::int64_t out, std::int64_t in, int stride, int pad,
                                                  int k) {
  std::int64_t lo = 0;
  const std::int64_t shift = pad - k;
  if (shift > 0) lo = (shift + stride - 1) / stride;
  std::int64_t hi_num = in - 1 + pad - k;
  std::int64_t hi = hi_num < 0 ? 0 : hi_num / stride + 1;
  return {std::min(lo, out), std::clamp<std::int64_t>(hi, 0, out)};
}

}  // namespace

std::int64_t window_extent(std::int64_t in, int k, int s, int pad_total) noexcept {
  const std::int64_t span = in + pad_total - k;
  if (span < 0 || s <= 0) return 0;
  return span / s + 1;
}

Shape4 conv2d_output_shape(const Shape4& x, const Shape4& w, const ConvGeometry& g) {
  if (g.groups < 1) throw ShapeError("conv2d: groups must be positive, got " + std::to_string(g.groups));
  if (g.stride_h < 1 || g.stride_w < 1) throw ShapeError("conv2d: stride must be positive");
  if (g.pad.top < 0 || g.pad.bottom < 0 || g.pad.left < 0 || g.pad.right < 0) {
    throw ShapeError("conv2d: padding must be non-negative");
  }
  if (x.c < 1 || w.n < 1) {
    throw ShapeError("conv2d: zero channels (input " + dims(x) + ", weight " + dims(w) + ")");
  }
  if (x.c % g.groups != 0) {
    throw ShapeError("conv2d: input channels c=" + std::to_string(x.c) + " not divisible by groups=" +
                     std::to_string(g.groups));
  }
  if (w.n % g.groups != 0) {
    throw ShapeError("conv2d: output channels c_out=" + std::to_string(w.n) +
                     " not divisible by groups=" + std::to_string(g.groups));
  }
  if (w.c * g.groups != x.c) {
    throw ShapeError("conv2d: input channel dimension c=" + std::to_string(x.c) + " != weight c_in/groups (" +
                     std::to_string(w.c) + ") * groups (" + std::to_string(g.groups) + ")");
  }
  if (w.h < 1 || w.w < 1) throw ShapeError("conv2d: empty kernel " + dims(w));
  const std::int64_t ho = window_extent(x.h, static_cast<int>(w.h), g.stride_h, g.pad.top + g.pad.bottom);
  const std::int64_t wo = window_extent(x.w, static_cast<int>(w.w), g.stride_w, g.pad.left + g.pad.right);
  if (ho < 1) throw ShapeError("conv2d: zero-sized output height for input " + dims(x) + ", kernel " + dims(w));
  if (wo < 1) throw ShapeError("conv2d: zero-sized output width for input " + dims(x) + ", kernel " + dims(w));
  return {x.n, w.n, ho, wo};
}

Shape4 maxpool2d_output_shape(const Shape4& x, const PoolGeometry& g) {
  if (g.kernel < 1 || g.stride < 1 || g.pad < 0) throw ShapeError("maxpool2d: invalid geometry");
  if (g.pad > g.kernel / 2) throw ShapeError("maxpool2d: padding must not exceed half the kernel");
  const std::int64_t ho = window_extent(x.h, g.kernel, g.stride, 2 * g.pad);
  const std::int64_t wo = window_extent(x.w, g.kernel, g.stride, 2 * g.pad);
  if (ho < 1 || wo < 1) throw ShapeError("maxpool2d: zero-sized output for input " + dims(x));
  return {x.n, x.c, ho, wo};
}

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, std::span<const T> bias,
                      const ConvGeometry& g) {
  const Shape4 os = conv2d_output_shape(x.shape(), w.shape(), g);
  if (!bias.empty()) require_length(bias.size(), os.c, "conv2d bias");
  BasicTensor<T> out(os);

  const std::int64_t cout_g = os.c / g.groups;
  const std::int64_t cin_g = w.shape().c;
  const std::int64_t kh_n = w.shape().h;
  const std::int64_t kw_n = w.shape().w;
  const std::int64_t H = x.shape().h;
  const std::int64_t W = x.shape().w;

  parallel_for(os.n * os.c, cin_g * kh_n * kw_n * os.plane(), [&](std::int64_t job) {
    const std::int64_t n = job / os.c;
    const std::int64_t oc = job % os.c;
    const std::int64_t ic0 = (oc / cout_g) * cin_g;
    T* dst = out.plane(n, oc);
    std::fill(dst, dst + os.plane(), bias.empty() ? T{0} : bias[static_cast<std::size_t>(oc)]);
    for (std::int64_t icl = 0; icl < cin_g; ++icl) {
      const T* src = x.plane(n, ic0 + icl);
      for (std::int64_t kh = 0; kh < kh_n; ++kh) {
        for (std::int64_t kw = 0; kw < kw_n; ++kw) {
          const T wv = w.at(oc, icl, kh, kw);
          const auto [lo, hi] = valid_range(os.w, W, g.stride_w, g.pad.left, static_cast<int>(kw));
          for (std::int64_t oy = 0; oy < os.h; ++oy) {
            const std::int64_t iy = oy * g.stride_h - g.pad.top + kh;
            if (iy < 0 || iy >= H) continue;
            const T* row = src + iy * W;
            T* orow = dst + oy * os.w;
            if (g.stride_w == 1) {
              const T* r = row - g.pad.left + kw;
              for (std::int64_t ox = lo; ox < hi; ++ox) orow[ox] += wv * r[ox];
            } else {
              for (std::int64_t ox = lo; ox < hi; ++ox) {
                orow[ox] += wv * row[ox * g.stride_w - g.pad.left + kw];
              }
            }
          }
        }
      }
    }
  });
  return out;
}

template <class T>
T activate_scalar(T x, Activation kind) noexcept {
  switch (kind) {
    case Activation::kIdentity:
      return x;
    case Activation::kSigmoid:
      return T{1} / (T{1} + std::exp(-x));
    case Activation::kSilu:
      return x / (T{1} + std::exp(-x));
  }
  return x;
}

template <class T>
BasicTensor<T> activate(const BasicTensor<T>& x, Activation kind) {
  if (kind == Activation::kIdentity) return x;
  BasicTensor<T> out(x.shape());
  auto src = x.data();
  auto dst = out.data();
  const std::int64_t planes = x.shape().n * x.shape().c;
  const std::int64_t p = x.shape().plane();
  parallel_for(planes, p * 8, [&](std::int64_t i) {
    for (std::int64_t j = i * p; j < (i + 1) * p; ++j) dst[j] = activate_scalar(src[j], kind);
  });
  return out;
}

template <class T>
BasicTensor<T> maxpool2d(const BasicTensor<T>& x, const PoolGeometry& g) {
  const Shape4 os = maxpool2d_output_shape(x.shape(), g);
  BasicTensor<T> out(os);
  const std::int64_t H = x.shape().h;
  const std::int64_t W = x.shape().w;
  parallel_for(os.n * os.c, os.plane() * g.kernel * g.kernel, [&](std::int64_t job) {
    const std::int64_t n = job / os.c;
    const std::int64_t c = job % os.c;
    const T* src = x.plane(n, c);
    T* dst = out.plane(n, c);
    for (std::int64_t oy = 0; oy < os.h; ++oy) {
      for (std::int64_t ox = 0; ox < os.w; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        for (int kh = 0; kh < g.kernel; ++kh) {
          const std::int64_t iy = oy * g.stride - g.pad + kh;
          if (iy < 0 || iy >= H) continue;
          for (int kw = 0; kw < g.kernel; ++kw) {
            const std::int64_t ix = ox * g.stride - g.pad + kw;
            if (ix < 0 || ix >= W) continue;
            const T v = src[iy * W + ix];
            if (v > best) best = v;
          }
        }
        dst[oy * os.w + ox] = best;
      }
    }
  });
  return out;
}

template <class T>
BasicTensor<T> upsample_nearest(const BasicTensor<T>& x, int scale) {
  if (scale < 1) throw ShapeError("upsample_nearest: scale must be >= 1, got " + std::to_string(scale));
  if (scale == 1) return x;
  const Shape4& s = x.shape();
  BasicTensor<T> out({s.n, s.c, s.h * scale, s.w * scale});
  const std::int64_t ow = s.w * scale;
  parallel_for(s.n * s.c, out.shape().plane(), [&](std::int64_t job) {
    const std::int64_t n = job / s.c;
    const std::int64_t c = job % s.c;
    const T* src = x.plane(n, c);
    T* dst = out.plane(n, c);
    for (std::int64_t oy = 0; oy < s.h * scale; ++oy) {
      const T* row = src + (oy / scale) * s.w;
      T* orow = dst + oy * ow;
      for (std::int64_t ox = 0; ox < ow; ++ox) orow[ox] = row[ox / scale];
    }
  });
  return out;
}

template <class T>
BasicTensor<T> concat_channels(std::span<const BasicTensor<T>> inputs) {
  if (inputs.empty()) throw ShapeError("concat_channels: no inputs");
  const Shape4& s0 = inputs.front().shape();
  std::int64_t channels = 0;
  for (const auto& t : inputs) {
    const Shape4& s = t.shape();
    if (s.n != s0.n || s.h != s0.h || s.w != s0.w) {
      throw ShapeError("concat_channels: spatial mismatch " + dims(s0) + " vs " + dims(s));
    }
    channels += s.c;
  }
  BasicTensor<T> out({s0.n, channels, s0.h, s0.w});
  for (std::int64_t n = 0; n < s0.n; ++n) {
    T* dst = out.plane(n, 0);
    for (const auto& t : inputs) {
      const std::int64_t len = t.shape().c * s0.plane();
      std::copy_n(t.plane(n, 0), len, dst);
      dst += len;
    }
  }
  return out;
}

template <class T>
BasicTensor<T> slice_channels(const BasicTensor<T>& x, std::int64_t begin, std::int64_t end) {
  const Shape4& s = x.shape();
  if (begin < 0 || end > s.c || begin >= end) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + dims(s));
  }
  BasicTensor<T> out({s.n, end - begin, s.h, s.w});
  for (std::int64_t n = 0; n < s.n; ++n) {
    std::copy_n(x.plane(n, begin), (end - begin) * s.plane(), out.plane(n, 0));
  }
  return out;
}

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<T> out(a.shape());
  auto pa = a.data();
  auto pb = b.data();
  auto po = out.data();
  for (std::size_t i = 0; i < po.size(); ++i) po[i] = pa[i] + pb[i];
  return out;
}

template <class T>
BasicTensor<T> batchnorm_inference(const BasicTensor<T>& x, std::span<const T> gamma, std::span<const T> beta,
                                   std::span<const T> mean, std::span<const T> var, double eps) {
  const Shape4& s = x.shape();
  require_length(gamma.size(), s.c, "batchnorm gamma");
  require_length(beta.size(), s.c, "batchnorm beta");
  require_length(mean.size(), s.c, "batchnorm mean");
  require_length(var.size(), s.c, "batchnorm var");
  BasicTensor<T> out(s);
  parallel_for(s.n * s.c, s.plane() * 2, [&](std::int64_t job) {
    const auto c = static_cast<std::size_t>(job % s.c);
    const T inv = T{1} / std::sqrt(var[c] + static_cast<T>(eps));
    const T scale = gamma[c] * inv;
    const T* src = x.plane(job / s.c, job % s.c);
    T* dst = out.plane(job / s.c, job % s.c);
    for (std::int64_t i = 0; i < s.plane(); ++i) dst[i] = (src[i] - mean[c]) * scale + beta[c];
  });
  return out;
}

template <class T>
BasicTensor<T> spatial_attention(const BasicTensor<T>& qkv, int heads, int key_dim, int head_dim, double scale,
                                 BasicTensor<T>* weights_out) {
  const Shape4& s = qkv.shape();
  const std::int64_t per_head = 2 * key_dim + head_dim;
  if (heads < 1 || key_dim < 1 || head_dim < 1 || s.c != heads * per_head) {
    throw ShapeError("spatial_attention: qkv has " + std::to_string(s.c) + " channels, expected heads*(2*key_dim+head_dim) = " +
                     std::to_string(heads * per_head));
  }
  const std::int64_t N = s.plane();
  BasicTensor<T> out({s.n, static_cast<std::int64_t>(heads) * head_dim, s.h, s.w});
  if (weights_out != nullptr) *weights_out = BasicTensor<T>({s.n, heads, N, N});
  const T sc = static_cast<T>(scale);

  parallel_for(s.n * heads * N, N * per_head, [&](std::int64_t job) {
    const std::int64_t n = job / (heads * N);
    const std::int64_t hd = (job / N) % heads;
    const std::int64_t a = job % N;
    const T* q = qkv.plane(n, hd * per_head);
    const T* k = qkv.plane(n, hd * per_head + key_dim);
    const T* v = qkv.plane(n, hd * per_head + 2 * key_dim);
    std::vector<T> row(static_cast<std::size_t>(N));
    T peak = -std::numeric_limits<T>::infinity();
    for (std::int64_t b = 0; b < N; ++b) {
      T acc{0};
      for (int d = 0; d < key_dim; ++d) acc += q[d * N + a] * k[d * N + b];
      row[b] = acc * sc;
      peak = std::max(peak, row[b]);
    }
    T total{0};
    for (auto& r : row) {
      r = std::exp(r - peak);
      total += r;
    }
    for (auto& r : row) r /= total;
    for (int d = 0; d < head_dim; ++d) {
      T acc{0};
      const T* vr = v + d * N;
      for (std::int64_t b = 0; b < N; ++b) acc += vr[b] * row[b];
      out.plane(n, hd * head_dim + d)[a] = acc;
    }
    if (weights_out != nullptr) std::copy(row.begin(), row.end(), weights_out->plane(n, hd) + a * N);
  });
  return out;
}

// Backward.

template <class T>
ConvGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, bool has_bias,
                             const ConvGeometry& g, const BasicTensor<T>& gy) {
  const Shape4 os = conv2d_output_shape(x.shape(), w.shape(), g);
  require_same_shape(os, gy.shape(), "conv2d_backward");
  ConvGrads<T> grads{BasicTensor<T>(x.shape()), BasicTensor<T>(w.shape()), {}};
  const std::int64_t cout_g = os.c / g.groups;
  const std::int64_t cin_g = w.shape().c;
  const std::int64_t K_h = w.shape().h;
  const std::int64_t K_w = w.shape().w;
  const std::int64_t H = x.shape().h;
  const std::int64_t W = x.shape().w;

  if (has_bias) {
    grads.bias.assign(static_cast<std::size_t>(os.c), T{0});
    for (std::int64_t oc = 0; oc < os.c; ++oc) {
      T acc{0};
      for (std::int64_t n = 0; n < os.n; ++n) {
        const T* p = gy.plane(n, oc);
        for (std::int64_t i = 0; i < os.plane(); ++i) acc += p[i];
      }
      grads.bias[static_cast<std::size_t>(oc)] = acc;
    }
  }

  // Weight gradient: one job per output channel.
  parallel_for(os.c, cin_g * K_h * K_w * os.plane() * os.n, [&](std::int64_t oc) {
    const std::int64_t ic0 = (oc / cout_g) * cin_g;
    for (std::int64_t icl = 0; icl < cin_g; ++icl) {
      for (std::int64_t kh = 0; kh < K_h; ++kh) {
        for (std::int64_t kw = 0; kw < K_w; ++kw) {
          T acc{0};
          for (std::int64_t n = 0; n < os.n; ++n) {
            const T* src = x.plane(n, ic0 + icl);
            const T* go = gy.plane(n, oc);
            for (std::int64_t oy = 0; oy < os.h; ++oy) {
              const std::int64_t iy = oy * g.stride_h - g.pad.top + kh;
              if (iy < 0 || iy >= H) continue;
              for (std::int64_t ox = 0; ox < os.w; ++ox) {
                const std::int64_t ix = ox * g.stride_w - g.pad.left + kw;
                if (ix < 0 || ix >= W) continue;
                acc += src[iy * W + ix] * go[oy * os.w + ox];
              }
            }
          }
          grads.weight.at(oc, icl, kh, kw) = acc;
        }
      }
    }
  });

  // Input gradient: one job per (n, input channel).
  parallel_for(x.shape().n * x.shape().c, cout_g * K_h * K_w * os.plane(), [&](std::int64_t job) {
    const std::int64_t n = job / x.shape().c;
    const std::int64_t ic = job % x.shape().c;
    const std::int64_t grp = ic / cin_g;
    const std::int64_t icl = ic % cin_g;
    T* dst = grads.input.plane(n, ic);
    for (std::int64_t oc = grp * cout_g; oc < (grp + 1) * cout_g; ++oc) {
      const T* go = gy.plane(n, oc);
      for (std::int64_t kh = 0; kh < K_h; ++kh) {
        for (std::int64_t kw = 0; kw < K_w; ++kw) {
          const T wv = w.at(oc, icl, kh, kw);
          for (std::int64_t oy = 0; oy < os.h; ++oy) {
            const std::int64_t iy = oy * g.stride_h - g.pad.top + kh;
            if (iy < 0 || iy >= H) continue;
            for (std::int64_t ox = 0; ox < os.w; ++ox) {
              const std::int64_t ix = ox * g.stride_w - g.pad.left + kw;
              if (ix < 0 || ix >= W) continue;
              dst[iy * W + ix] += wv * go[oy * os.w + ox];
            }
          }
        }
      }
    }
  });
  return grads;
}

template <class T>
BasicTensor<T> activate_backward(const BasicTensor<T>& x, Activation kind, const BasicTensor<T>& gy) {
  require_same_shape(x.shape(), gy.shape(), "activate_backward");
  if (kind == Activation::kIdentity) return gy;
  BasicTensor<T> gx(x.shape());
  auto src = x.data();
  auto go = gy.data();
  auto dst = gx.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const T sig = T{1} / (T{1} + std::exp(-src[i]));
    const T d = kind == Activation::kSigmoid ? sig * (T{1} - sig) : sig * (T{1} + src[i] * (T{1} - sig));
    dst[i] = go[i] * d;
  }
  return gx;
}

template <class T>
BasicTensor<T> maxpool2d_backward(const BasicTensor<T>& x, const PoolGeometry& g, const BasicTensor<T>& gy) {
  const Shape4 os = maxpool2d_output_shape(x.shape(), g);
  require_same_shape(os, gy.shape(), "maxpool2d_backward");
  BasicTensor<T> gx(x.shape());
  const std::int64_t H = x.shape().h;
  const std::int64_t W = x.shape().w;
  for (std::int64_t n = 0; n < os.n; ++n) {
    for (std::int64_t c = 0; c < os.c; ++c) {
      const T* src = x.plane(n, c);
      const T* go = gy.plane(n, c);
      T* dst = gx.plane(n, c);
      for (std::int64_t oy = 0; oy < os.h; ++oy) {
        for (std::int64_t ox = 0; ox < os.w; ++ox) {
          T best = -std::numeric_limits<T>::infinity();
          std::int64_t arg = -1;
          for (int kh = 0; kh < g.kernel; ++kh) {
            const std::int64_t iy = oy * g.stride - g.pad + kh;
            if (iy < 0 || iy >= H) continue;
            for (int kw = 0; kw < g.kernel; ++kw) {
              const std::int64_t ix = ox * g.stride - g.pad + kw;
              if (ix < 0 || ix >= W) continue;
              if (src[iy * W + ix] > best) {
                best = src[iy * W + ix];
                arg = iy * W + ix;
              }
            }
          }
          if (arg >= 0) dst[arg] += go[oy * os.w + ox];
        }
      }
    }
  }
  return gx;
}

template <class T>
BasicTensor<T> upsample_nearest_backward(const BasicTensor<T>& gy, int scale) {
  if (scale < 1) throw ShapeError("upsample_nearest_backward: scale must be >= 1");
  const Shape4& s = gy.shape();
  if (s.h % scale != 0 || s.w % scale != 0) throw ShapeError("upsample_nearest_backward: shape " + dims(s) + " not divisible by scale");
  BasicTensor<T> gx({s.n, s.c, s.h / scale, s.w / scale});
  const std::int64_t iw = s.w / scale;
  for (std::int64_t n = 0; n < s.n; ++n) {
    for (std::int64_t c = 0; c < s.c; ++c) {
      const T* go = gy.plane(n, c);
      T* dst = gx.plane(n, c);
      for (std::int64_t oy = 0; oy < s.h; ++oy) {
        for (std::int64_t ox = 0; ox < s.w; ++ox) dst[(oy / scale) * iw + ox / scale] += go[oy * s.w + ox];
      }
    }
  }
  return gx;
}

template <class T>
std::vector<BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& gy, std::span<const std::int64_t> channels) {
  std::int64_t total = 0;
  for (auto c : channels) total += c;
  if (total != gy.shape().c) throw ShapeError("concat_channels_backward: channel widths do not sum to " + std::to_string(gy.shape().c));
  std::vector<BasicTensor<T>> parts;
  std::int64_t begin = 0;
  for (auto c : channels) {
    parts.push_back(slice_channels(gy, begin, begin + c));
    begin += c;
  }
  return parts;
}

template <class T>
BasicTensor<T> slice_channels_backward(const Shape4& input_shape, std::int64_t begin, const BasicTensor<T>& gy) {
  BasicTensor<T> gx(input_shape);
  const Shape4& s = gy.shape();
  if (s.n != input_shape.n || s.h != input_shape.h || s.w != input_shape.w || begin < 0 || begin + s.c > input_shape.c) {
    throw ShapeError("slice_channels_backward: gradient " + dims(s) + " does not fit " + dims(input_shape));
  }
  for (std::int64_t n = 0; n < s.n; ++n) std::copy_n(gy.plane(n, 0), s.c * s.plane(), gx.plane(n, begin));
  return gx;
}

template <class T>
BatchNormGrads<T> batchnorm_inference_backward(const BasicTensor<T>& x, std::span<const T> gamma,
                                               std::span<const T> mean, std::span<const T> var, double eps,
                                               const BasicTensor<T>& gy) {
  require_same_shape(x.shape(), gy.shape(), "batchnorm_inference_backward");
  const Shape4& s = x.shape();
  require_length(gamma.size(), s.c, "batchnorm gamma");
  require_length(mean.size(), s.c, "batchnorm mean");
  require_length(var.size(), s.c, "batchnorm var");
  const auto C = static_cast<std::size_t>(s.c);
  BatchNormGrads<T> g{BasicTensor<T>(s), std::vector<T>(C), std::vector<T>(C), std::vector<T>(C), std::vector<T>(C)};
  for (std::size_t c = 0; c < C; ++c) {
    const T denom = var[c] + static_cast<T>(eps);
    const T inv = T{1} / std::sqrt(denom);
    T sum_gy{0};
    T sum_gy_xc{0};
    for (std::int64_t n = 0; n < s.n; ++n) {
      const T* src = x.plane(n, static_cast<std::int64_t>(c));
      const T* go = gy.plane(n, static_cast<std::int64_t>(c));
      T* dst = g.input.plane(n, static_cast<std::int64_t>(c));
      for (std::int64_t i = 0; i < s.plane(); ++i) {
        sum_gy += go[i];
        sum_gy_xc += go[i] * (src[i] - mean[c]);
        dst[i] = go[i] * gamma[c] * inv;
      }
    }
    g.beta[c] = sum_gy;
    g.gamma[c] = sum_gy_xc * inv;
    g.mean[c] = -gamma[c] * inv * sum_gy;
    g.var[c] = -T{0.5} * gamma[c] * sum_gy_xc * inv / denom;
  }
  return g;
}

#define Y4K_INSTANTIATE(T)                                                                                   \
  template BasicTensor<T> conv2d<T>(const BasicTensor<T>&, const BasicTensor<T>&, std::span<const T>,         \
                                    const ConvGeometry&);                                                    \
  template T activate_scalar<T>(T, Activation) noexcept;                                                     \
  template BasicTensor<T> activate<T>(const BasicTensor<T>&, Activation);                                    \
  template BasicTensor<T> maxpool2d<T>(const BasicTensor<T>&, const PoolGeometry&);                          \
  template BasicTensor<T> upsample_nearest<T>(const BasicTensor<T>&, int);                                   \
  template BasicTensor<T> concat_channels<T>(std::span<const BasicTensor<T>>);                               \
  template BasicTensor<T> slice_channels<T>(const BasicTensor<T>&, std::int64_t, std::int64_t);              \
  template BasicTensor<T> add<T>(const BasicTensor<T>&, const BasicTensor<T>&);                              \
  template BasicTensor<T> batchnorm_inference<T>(const BasicTensor<T>&, std::span<const T>,                  \
                                                 std::span<const T>, std::span<const T>, std::span<const T>, \
                                                 double);                                                    \
  template BasicTensor<T> spatial_attention<T>(const BasicTensor<T>&, int, int, int, double, BasicTensor<T>*); \
  template ConvGrads<T> conv2d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&, bool,               \
                                           const ConvGeometry&, const BasicTensor<T>&);                      \
  template BasicTensor<T> activate_backward<T>(const BasicTensor<T>&, Activation, const BasicTensor<T>&);    \
  template BasicTensor<T> maxpool2d_backward<T>(const BasicTensor<T>&, const PoolGeometry&,                  \
                                                const BasicTensor<T>&);                                      \
  template BasicTensor<T> upsample_nearest_backward<T>(const BasicTensor<T>&, int);                          \
  template std::vector<BasicTensor<T>> concat_channels_backward<T>(const BasicTensor<T>&,                    \
                                                                   std::span<const std::int64_t>);           \
  template BasicTensor<T> slice_channels_backward<T>(const Shape4&, std::int64_t, const BasicTensor<T>&);    \
  template BatchNormGrads<T> batchnorm_inference_backward<T>(const BasicTensor<T>&, std::span<const T>,      \
                                                             std::span<const T>, std::span<const T>, double, \
                                                             const BasicTensor<T>&);

Y4K_INSTANTIATE(float)
Y4K_INSTANTIATE(double)

#undef Y4K_INSTANTIATE

}  // namespace y4k
