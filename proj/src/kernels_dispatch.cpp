#include "gifnet/kernels.hpp"

#include <cstdlib>
#include <string>

#include "gifnet/errors.hpp"

namespace gifnet::kernels {

namespace {

Backend detect_default() {
  if (const char* env = std::getenv("GIFNET_KERNELS")) {
    const std::string s(env);
    if (s == "scalar") return Backend::kScalar;
    if (s == "avx2") {
      if (!backend_runtime_supported(Backend::kAvx2))
        throw ConfigError("GIFNET_KERNELS=avx2 but this CPU or build lacks AVX2");
      return Backend::kAvx2;
    }
    throw ConfigError("unknown GIFNET_KERNELS value '" + s + "' (expected scalar|avx2)");
  }
  if (backend_runtime_supported(Backend::kAvx2)) return Backend::kAvx2;
  return Backend::kScalar;
}

Backend& active_slot() {
  static Backend b = detect_default();
  return b;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "?";
}

bool backend_compiled(Backend b) {
  if (b == Backend::kScalar) return true;
#if GIFNET_KERNELS_HAVE_AVX2
  if (b == Backend::kAvx2) return true;
#endif
  return false;
}

bool backend_runtime_supported(Backend b) {
  if (!backend_compiled(b)) return false;
#if GIFNET_KERNELS_HAVE_AVX2
  if (b == Backend::kAvx2) return __builtin_cpu_supports("avx2") != 0;
#endif
  return true;
}

Backend active_backend() { return active_slot(); }

void set_backend(Backend b) {
  if (!backend_runtime_supported(b))
    throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                      "' is not available on this machine");
  active_slot() = b;
}

#if GIFNET_KERNELS_HAVE_AVX2
#define GIFNET_DISPATCH(fn, ...)                    \
  do {                                              \
    if (active_slot() == Backend::kAvx2) {          \
      avx2::fn(__VA_ARGS__);                        \
      return;                                       \
    }                                               \
    scalar::fn(__VA_ARGS__);                        \
  } while (0)
#define GIFNET_DISPATCH_RET(fn, ...)                \
  do {                                              \
    if (active_slot() == Backend::kAvx2) {          \
      return avx2::fn(__VA_ARGS__);                 \
    }                                               \
    return scalar::fn(__VA_ARGS__);                 \
  } while (0)
#else
#define GIFNET_DISPATCH(fn, ...) \
  do {                           \
    scalar::fn(__VA_ARGS__);     \
  } while (0)
#define GIFNET_DISPATCH_RET(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void conv2d_forward(const double* input, const double* kernel, const double* bias,
                    double* output, const Conv2dDims& d) {
  GIFNET_DISPATCH(conv2d_forward, input, kernel, bias, output, d);
}

void conv2d_backward_input(const double* grad_out, const double* kernel,
                           double* grad_in, const Conv2dDims& d) {
  GIFNET_DISPATCH(conv2d_backward_input, grad_out, kernel, grad_in, d);
}

void conv2d_backward_kernel(const double* grad_out, const double* input,
                            double* grad_kernel, const Conv2dDims& d) {
  GIFNET_DISPATCH(conv2d_backward_kernel, grad_out, input, grad_kernel, d);
}

void conv2d_backward_bias(const double* grad_out, double* grad_bias, const Conv2dDims& d) {
  GIFNET_DISPATCH(conv2d_backward_bias, grad_out, grad_bias, d);
}

void relu_forward(const double* x, double* y, int64_t n) {
  GIFNET_DISPATCH(relu_forward, x, y, n);
}

void relu_backward(const double* grad_y, const double* x, double* grad_x, int64_t n) {
  GIFNET_DISPATCH(relu_backward, grad_y, x, grad_x, n);
}

void sigmoid_forward(const double* x, double* y, int64_t n) {
  GIFNET_DISPATCH(sigmoid_forward, x, y, n);
}

void sigmoid_backward(const double* grad_y, const double* y, double* grad_x, int64_t n) {
  GIFNET_DISPATCH(sigmoid_backward, grad_y, y, grad_x, n);
}

void mul_forward(const double* a, const double* b, double* y, int64_t n) {
  GIFNET_DISPATCH(mul_forward, a, b, y, n);
}

void mul_accumulate(const double* a, const double* b, double* acc, int64_t n) {
  GIFNET_DISPATCH(mul_accumulate, a, b, acc, n);
}

void add_forward(const double* a, const double* b, double* y, int64_t n) {
  GIFNET_DISPATCH(add_forward, a, b, y, n);
}

void axpy(double alpha, const double* x, double* y, int64_t n) {
  GIFNET_DISPATCH(axpy, alpha, x, y, n);
}

void scale_forward(const double* x, double alpha, double* y, int64_t n) {
  GIFNET_DISPATCH(scale_forward, x, alpha, y, n);
}

void broadcast_mul_forward(const double* f, const double* w, double* y, int k, int64_t plane) {
  GIFNET_DISPATCH(broadcast_mul_forward, f, w, y, k, plane);
}

void broadcast_mul_backward_feature(const double* grad_y, const double* w, double* grad_f,
                                    int k, int64_t plane) {
  GIFNET_DISPATCH(broadcast_mul_backward_feature, grad_y, w, grad_f, k, plane);
}

void broadcast_mul_backward_weight(const double* grad_y, const double* f, double* grad_w,
                                   int k, int64_t plane) {
  GIFNET_DISPATCH(broadcast_mul_backward_weight, grad_y, f, grad_w, k, plane);
}

void sgd_update(double* param, const double* grad, double* velocity, int64_t n,
                double lr, double momentum, double weight_decay) {
  GIFNET_DISPATCH(sgd_update, param, grad, velocity, n, lr, momentum, weight_decay);
}

double sum_all(const double* x, int64_t n) { GIFNET_DISPATCH_RET(sum_all, x, n); }

}  // namespace gifnet::kernels
