#include "gifnet/kernels.hpp"

#if GIFNET_KERNELS_HAVE_AVX2

#include <immintrin.h>

#include <cmath>

// AVX2 variants. Lanes always map to independent output elements; the
// per-lane term order equals the scalar reference, and multiplies/adds stay
// separate instructions. Out-of-range lanes contribute an exact zero term,
// which leaves the accumulator value unchanged (up to the sign of zero).

namespace gifnet::kernels::avx2 {

namespace {

// lane l reads row[base + l*step] when the index is in [0, limit), else 0
inline __m256d load_lanes(const double* row, int base, int step, int limit) {
  alignas(32) double tmp[4];
  for (int l = 0; l < 4; ++l) {
    const int idx = base + l * step;
    tmp[l] = (idx >= 0 && idx < limit) ? row[idx] : 0.0;
  }
  return _mm256_load_pd(tmp);
}

inline double conv_forward_element(const double* input, const double* kernel,
                                   const Conv2dDims& d, int co, int y, int x) {
  double acc = 0.0;
  for (int ci = 0; ci < d.c_in; ++ci) {
    const double* in_plane = input + (int64_t(ci) * d.h_in) * d.w_in;
    const double* k_plane = kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
    for (int ky = 0; ky < d.kh; ++ky) {
      const int iy = y * d.stride - d.padding + ky;
      if (iy < 0 || iy >= d.h_in) continue;
      for (int kx = 0; kx < d.kw; ++kx) {
        const int ix = x * d.stride - d.padding + kx;
        if (ix < 0 || ix >= d.w_in) continue;
        acc += in_plane[int64_t(iy) * d.w_in + ix] * k_plane[ky * d.kw + kx];
      }
    }
  }
  return acc;
}

inline double conv_backward_input_element(const double* grad_out, const double* kernel,
                                          const Conv2dDims& d, int ci, int iy, int ix) {
  double acc = 0.0;
  for (int co = 0; co < d.c_out; ++co) {
    const double* go_plane = grad_out + (int64_t(co) * d.h_out) * d.w_out;
    const double* k_plane = kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
    for (int ky = 0; ky < d.kh; ++ky) {
      const int ty = iy + d.padding - ky;
      if (ty < 0 || ty % d.stride != 0) continue;
      const int oy = ty / d.stride;
      if (oy >= d.h_out) continue;
      for (int kx = 0; kx < d.kw; ++kx) {
        const int tx = ix + d.padding - kx;
        if (tx < 0 || tx % d.stride != 0) continue;
        const int ox = tx / d.stride;
        if (ox >= d.w_out) continue;
        acc += go_plane[int64_t(oy) * d.w_out + ox] * k_plane[ky * d.kw + kx];
      }
    }
  }
  return acc;
}

}  // namespace

void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d) {
  for (int co = 0; co < d.c_out; ++co) {
    const __m256d vb = _mm256_set1_pd(bias[co]);
    for (int y = 0; y < d.h_out; ++y) {
      double* out_row = output + (int64_t(co) * d.h_out + y) * d.w_out;
      int x = 0;
      for (; x + 4 <= d.w_out; x += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int ci = 0; ci < d.c_in; ++ci) {
          const double* in_plane = input + (int64_t(ci) * d.h_in) * d.w_in;
          const double* k_plane = kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
          for (int ky = 0; ky < d.kh; ++ky) {
            const int iy = y * d.stride - d.padding + ky;
            if (iy < 0 || iy >= d.h_in) continue;
            const double* in_row = in_plane + int64_t(iy) * d.w_in;
            for (int kx = 0; kx < d.kw; ++kx) {
              const int base = x * d.stride - d.padding + kx;
              __m256d vin;
              if (d.stride == 1 && base >= 0 && base + 3 < d.w_in) {
                vin = _mm256_loadu_pd(in_row + base);
              } else {
                vin = load_lanes(in_row, base, d.stride, d.w_in);
              }
              const __m256d vk = _mm256_set1_pd(k_plane[ky * d.kw + kx]);
              acc = _mm256_add_pd(acc, _mm256_mul_pd(vin, vk));
            }
          }
        }
        _mm256_storeu_pd(out_row + x, _mm256_add_pd(acc, vb));
      }
      for (; x < d.w_out; ++x) {
        out_row[x] = conv_forward_element(input, kernel, d, co, y, x) + bias[co];
      }
    }
  }
}

void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d) {
  for (int ci = 0; ci < d.c_in; ++ci) {
    for (int iy = 0; iy < d.h_in; ++iy) {
      double* gi_row = grad_in + (int64_t(ci) * d.h_in + iy) * d.w_in;
      int ix = 0;
      for (; ix + 4 <= d.w_in; ix += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int co = 0; co < d.c_out; ++co) {
          const double* go_plane = grad_out + (int64_t(co) * d.h_out) * d.w_out;
          const double* k_plane = kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
          for (int ky = 0; ky < d.kh; ++ky) {
            const int ty = iy + d.padding - ky;
            if (ty < 0 || ty % d.stride != 0) continue;
            const int oy = ty / d.stride;
            if (oy >= d.h_out) continue;
            const double* go_row = go_plane + int64_t(oy) * d.w_out;
            for (int kx = 0; kx < d.kw; ++kx) {
              __m256d vgo;
              if (d.stride == 1) {
                const int base = ix + d.padding - kx;
                if (base >= 0 && base + 3 < d.w_out) {
                  vgo = _mm256_loadu_pd(go_row + base);
                } else {
                  vgo = load_lanes(go_row, base, 1, d.w_out);
                }
              } else {
                alignas(32) double tmp[4];
                for (int l = 0; l < 4; ++l) {
                  const int tx = ix + l + d.padding - kx;
                  tmp[l] = 0.0;
                  if (tx >= 0 && tx % d.stride == 0) {
                    const int ox = tx / d.stride;
                    if (ox < d.w_out) tmp[l] = go_row[ox];
                  }
                }
                vgo = _mm256_load_pd(tmp);
              }
              const __m256d vk = _mm256_set1_pd(k_plane[ky * d.kw + kx]);
              acc = _mm256_add_pd(acc, _mm256_mul_pd(vgo, vk));
            }
          }
        }
        _mm256_storeu_pd(gi_row + ix, _mm256_add_pd(_mm256_loadu_pd(gi_row + ix), acc));
      }
      for (; ix < d.w_in; ++ix) {
        gi_row[ix] += conv_backward_input_element(grad_out, kernel, d, ci, iy, ix);
      }
    }
  }
}

void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d) {
  const int64_t plane = int64_t(d.h_out) * d.w_out;
  const int64_t kstep = int64_t(d.c_in) * d.kh * d.kw;
  int co = 0;
  for (; co + 4 <= d.c_out; co += 4) {
    const double* go0 = grad_out + co * plane;
    for (int ci = 0; ci < d.c_in; ++ci) {
      const double* in_plane = input + (int64_t(ci) * d.h_in) * d.w_in;
      for (int ky = 0; ky < d.kh; ++ky) {
        for (int kx = 0; kx < d.kw; ++kx) {
          __m256d acc = _mm256_setzero_pd();
          for (int oy = 0; oy < d.h_out; ++oy) {
            const int iy = oy * d.stride - d.padding + ky;
            if (iy < 0 || iy >= d.h_in) continue;
            const double* in_row = in_plane + int64_t(iy) * d.w_in;
            const double* go_row = go0 + int64_t(oy) * d.w_out;
            for (int ox = 0; ox < d.w_out; ++ox) {
              const int ix = ox * d.stride - d.padding + kx;
              if (ix < 0 || ix >= d.w_in) continue;
              const __m256d vgo =
                  _mm256_set_pd(go_row[3 * plane + ox], go_row[2 * plane + ox],
                                go_row[plane + ox], go_row[ox]);
              const __m256d vin = _mm256_set1_pd(in_row[ix]);
              acc = _mm256_add_pd(acc, _mm256_mul_pd(vgo, vin));
            }
          }
          alignas(32) double tmp[4];
          _mm256_store_pd(tmp, acc);
          const int64_t base = (int64_t(co) * d.c_in + ci) * d.kh * d.kw + ky * d.kw + kx;
          for (int l = 0; l < 4; ++l) grad_kernel[base + l * kstep] += tmp[l];
        }
      }
    }
  }
  if (co < d.c_out) {
    Conv2dDims rest = d;
    rest.c_out = d.c_out - co;
    scalar::conv2d_backward_kernel(grad_out + co * plane, input,
                                   grad_kernel + co * kstep, rest);
  }
}

void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d) {
  scalar::conv2d_backward_bias(grad_out, grad_bias, d);
}

void relu_forward(const double* x, double* y, int64_t n) {
  const __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n) {
  const __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d contrib = _mm256_and_pd(mask, _mm256_loadu_pd(grad_y + i));
    _mm256_storeu_pd(grad_x + i, _mm256_add_pd(_mm256_loadu_pd(grad_x + i), contrib));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) grad_x[i] += grad_y[i];
  }
}

void sigmoid_forward(const double* x, double* y, int64_t n) {
  scalar::sigmoid_forward(x, y, n);
}

void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d s = _mm256_mul_pd(vy, _mm256_sub_pd(one, vy));
    const __m256d contrib = _mm256_mul_pd(_mm256_loadu_pd(grad_y + i), s);
    _mm256_storeu_pd(grad_x + i, _mm256_add_pd(_mm256_loadu_pd(grad_x + i), contrib));
  }
  for (; i < n; ++i) {
    const double s = y[i] * (1.0 - y[i]);
    grad_x[i] += grad_y[i] * s;
  }
}

void mul_forward(const double* a, const double* b, double* y, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void mul_accumulate(const double* a, const double* b, double* acc, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), prod));
  }
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void add_forward(const double* a, const double* b, double* y, int64_t n) {
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_forward(const double* x, double alpha, double* y, int64_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  }
  for (; i < n; ++i) y[i] = x[i] * alpha;
}

void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane) {
  for (int c = 0; c < k; ++c) {
    mul_forward(f + c * plane, w, y + c * plane, plane);
  }
}

void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane) {
  for (int c = 0; c < k; ++c) {
    mul_accumulate(grad_y + c * plane, w, grad_f + c * plane, plane);
  }
}

void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane) {
  for (int c = 0; c < k; ++c) {
    mul_accumulate(grad_y + c * plane, f + c * plane, grad_w, plane);
  }
}

void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vwd = _mm256_set1_pd(weight_decay);
  const __m256d vlr = _mm256_set1_pd(lr);
  int64_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(param + i);
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d vold = _mm256_loadu_pd(velocity + i);
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(vm, vold),
                                    _mm256_add_pd(g, _mm256_mul_pd(vwd, p)));
    _mm256_storeu_pd(velocity + i, v);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(p, _mm256_mul_pd(vlr, v)));
  }
  for (; i < n; ++i) {
    const double v = momentum * velocity[i] + (grad[i] + weight_decay * param[i]);
    velocity[i] = v;
    param[i] -= lr * v;
  }
}

double sum_all(const double* x, int64_t n) { return scalar::sum_all(x, n); }

}  // namespace gifnet::kernels::avx2

#endif  // GIFNET_KERNELS_HAVE_AVX2
