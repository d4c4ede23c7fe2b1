#pragma once

#include <cstdint>

// Arithmetic inner loops, in two interchangeable variants: a portable scalar
// reference and an AVX2 implementation selected at runtime when the CPU
// supports it (override with GIFNET_KERNELS=scalar|avx2 or set_backend()).
//
// Exactness contract: every variant performs the same floating-point
// operations in the same per-element order as the scalar reference. SIMD
// variants vectorize across independent output elements only and never fuse
// multiply-add, so results compare equal element-wise (`==`, which treats
// -0.0 and +0.0 alike) with the scalar path. The build disables FP
// contraction to keep the scalar reference itself canonical.
//
// Backward kernels accumulate into their gradient argument; callers zero it.

namespace gifnet::kernels {

enum class Backend { kScalar, kAvx2 };

const char* backend_name(Backend b);
bool backend_compiled(Backend b);
bool backend_runtime_supported(Backend b);

// Active backend for all dispatched calls below. Defaults to the fastest
// supported variant; GIFNET_KERNELS in the environment overrides.
Backend active_backend();
void set_backend(Backend b);  // throws ConfigError if unavailable

struct Conv2dDims {
  int c_in = 0, h_in = 0, w_in = 0;
  int c_out = 0, kh = 0, kw = 0;
  int padding = 0, stride = 1;
  int h_out = 0, w_out = 0;

  // h_out = (h_in + 2*padding - kh) / stride + 1 (floor), same for w_out
  static Conv2dDims make(int c_in, int h_in, int w_in, int c_out, int kh, int kw,
                         int padding, int stride);

  int64_t in_elems() const { return int64_t(c_in) * h_in * w_in; }
  int64_t out_elems() const { return int64_t(c_out) * h_out * w_out; }
  int64_t kernel_elems() const { return int64_t(c_out) * c_in * kh * kw; }
};

// Cross-correlation (no kernel flip), zero padding.
// input  [c_in, h_in, w_in], kernel [c_out, c_in, kh, kw], bias [c_out],
// output [c_out, h_out, w_out], all row-major.
void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d);
void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d);
void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d);
void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d);

void relu_forward(const double* x, double* y, int64_t n);
// mask is x > 0; the subgradient at exactly 0 is 0
void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n);

// sigmoid stays scalar in every backend: a vectorized exp would change bits
void sigmoid_forward(const double* x, double* y, int64_t n);
void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n);

void mul_forward(const double* a, const double* b, double* y, int64_t n);
void mul_accumulate(const double* a, const double* b, double* acc, int64_t n);  // acc += a*b
void add_forward(const double* a, const double* b, double* y, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);  // y += alpha*x
void scale_forward(const double* x, double alpha, double* y, int64_t n);

// f [k, plane], w [plane]; y[c,p] = f[c,p] * w[p]
void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane);
void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane);
void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane);

// v = momentum*v + (g + weight_decay*p); p -= lr*v
void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay);

// sequential left-to-right reduction in every backend
double sum_all(const double* x, int64_t n);

namespace scalar {
void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d);
void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d);
void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d);
void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d);
void relu_forward(const double* x, double* y, int64_t n);
void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n);
void sigmoid_forward(const double* x, double* y, int64_t n);
void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n);
void mul_forward(const double* a, const double* b, double* y, int64_t n);
void mul_accumulate(const double* a, const double* b, double* acc, int64_t n);
void add_forward(const double* a, const double* b, double* y, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
void scale_forward(const double* x, double alpha, double* y, int64_t n);
void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane);
void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane);
void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane);
void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay);
double sum_all(const double* x, int64_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GIFNET_KERNELS_HAVE_AVX2 1
namespace avx2 {
void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d);
void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d);
void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d);
void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d);
void relu_forward(const double* x, double* y, int64_t n);
void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n);
void sigmoid_forward(const double* x, double* y, int64_t n);
void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n);
void mul_forward(const double* a, const double* b, double* y, int64_t n);
void mul_accumulate(const double* a, const double* b, double* acc, int64_t n);
void add_forward(const double* a, const double* b, double* y, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
void scale_forward(const double* x, double alpha, double* y, int64_t n);
void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane);
void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane);
void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane);
void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay);
double sum_all(const double* x, int64_t n);
}  // namespace avx2
#else
#define GIFNET_KERNELS_HAVE_AVX2 0
#endif

}  // namespace gifnet::kernels
