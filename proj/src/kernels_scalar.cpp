#include "gifnet/kernels.hpp"

#include <cmath>

#include "gifnet/errors.hpp"

// Reference implementations. The loop structure here is the contract: each
// output element accumulates its terms in exactly this order, and the SIMD
// variants replicate it lane for lane.

namespace gifnet::kernels {

Conv2dDims Conv2dDims::make(int c_in, int h_in, int w_in, int c_out, int kh, int kw,
                            int padding, int stride) {
  Conv2dDims d;
  d.c_in = c_in;
  d.h_in = h_in;
  d.w_in = w_in;
  d.c_out = c_out;
  d.kh = kh;
  d.kw = kw;
  d.padding = padding;
  d.stride = stride;
  d.h_out = (h_in + 2 * padding - kh) / stride + 1;
  d.w_out = (w_in + 2 * padding - kw) / stride + 1;
  return d;
}

namespace scalar {

void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d) {
  for (int co = 0; co < d.c_out; ++co) {
    const double b = bias[co];
    for (int y = 0; y < d.h_out; ++y) {
      for (int x = 0; x < d.w_out; ++x) {
        double acc = 0.0;
        for (int ci = 0; ci < d.c_in; ++ci) {
          const double* in_plane = input + (int64_t(ci) * d.h_in) * d.w_in;
          const double* k_plane =
              kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
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
        output[(int64_t(co) * d.h_out + y) * d.w_out + x] = acc + b;
      }
    }
  }
}

void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d) {
  for (int ci = 0; ci < d.c_in; ++ci) {
    for (int iy = 0; iy < d.h_in; ++iy) {
      for (int ix = 0; ix < d.w_in; ++ix) {
        double acc = 0.0;
        for (int co = 0; co < d.c_out; ++co) {
          const double* go_plane = grad_out + (int64_t(co) * d.h_out) * d.w_out;
          const double* k_plane =
              kernel + ((int64_t(co) * d.c_in + ci) * d.kh) * d.kw;
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
        grad_in[(int64_t(ci) * d.h_in + iy) * d.w_in + ix] += acc;
      }
    }
  }
}

void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d) {
  for (int co = 0; co < d.c_out; ++co) {
    const double* go_plane = grad_out + (int64_t(co) * d.h_out) * d.w_out;
    for (int ci = 0; ci < d.c_in; ++ci) {
      const double* in_plane = input + (int64_t(ci) * d.h_in) * d.w_in;
      for (int ky = 0; ky < d.kh; ++ky) {
        for (int kx = 0; kx < d.kw; ++kx) {
          double acc = 0.0;
          for (int oy = 0; oy < d.h_out; ++oy) {
            const int iy = oy * d.stride - d.padding + ky;
            if (iy < 0 || iy >= d.h_in) continue;
            for (int ox = 0; ox < d.w_out; ++ox) {
              const int ix = ox * d.stride - d.padding + kx;
              if (ix < 0 || ix >= d.w_in) continue;
              acc += go_plane[int64_t(oy) * d.w_out + ox] * in_plane[int64_t(iy) * d.w_in + ix];
            }
          }
          grad_kernel[((int64_t(co) * d.c_in + ci) * d.kh + ky) * d.kw + kx] += acc;
        }
      }
    }
  }
}

void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d) {
  const int64_t plane = int64_t(d.h_out) * d.w_out;
  for (int co = 0; co < d.c_out; ++co) {
    double acc = 0.0;
    const double* go_plane = grad_out + co * plane;
    for (int64_t i = 0; i < plane; ++i) acc += go_plane[i];
    grad_bias[co] += acc;
  }
}

void relu_forward(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) grad_x[i] += grad_y[i];
  }
}

void sigmoid_forward(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const double s = y[i] * (1.0 - y[i]);
    grad_x[i] += grad_y[i] * s;
  }
}

void mul_forward(const double* a, const double* b, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void mul_accumulate(const double* a, const double* b, double* acc, int64_t n) {
  for (int64_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void add_forward(const double* a, const double* b, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_forward(const double* x, double alpha, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] * alpha;
}

void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane) {
  for (int c = 0; c < k; ++c) {
    const double* fc = f + c * plane;
    double* yc = y + c * plane;
    for (int64_t p = 0; p < plane; ++p) yc[p] = fc[p] * w[p];
  }
}

void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane) {
  for (int c = 0; c < k; ++c) {
    const double* gc = grad_y + c * plane;
    double* fc = grad_f + c * plane;
    for (int64_t p = 0; p < plane; ++p) fc[p] += gc[p] * w[p];
  }
}

void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane) {
  // per-pixel accumulation runs over channels in index order
  for (int c = 0; c < k; ++c) {
    const double* gc = grad_y + c * plane;
    const double* fc = f + c * plane;
    for (int64_t p = 0; p < plane; ++p) grad_w[p] += gc[p] * fc[p];
  }
}

void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay) {
  for (int64_t i = 0; i < n; ++i) {
    const double v = momentum * velocity[i] + (grad[i] + weight_decay * param[i]);
    velocity[i] = v;
    param[i] -= lr * v;
  }
}

double sum_all(const double* x, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace scalar
}  // namespace gifnet::kernels
