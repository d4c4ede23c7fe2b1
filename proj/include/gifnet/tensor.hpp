#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gifnet {

class Tape;

// Dense row-major tensor of 64-bit floats. Copies are shallow handles onto
// shared storage; gradient storage is allocated lazily on first accumulation.
// Every recorded operation checks its output for NaN/Inf and throws
// NumericError on the first non-finite value.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false);
  static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar_value(double value, bool requires_grad = false);
  // uniform(-bound, bound) elementwise
  static Tensor uniform(std::vector<int> shape, double bound, class Rng& rng,
                        bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const;
  int ndim() const;
  int dim(int i) const;
  int64_t numel() const;

  bool requires_grad() const;
  void set_requires_grad(bool v);

  std::span<const double> values() const;
  std::span<double> values_mut();
  double scalar() const;  // throws unless numel()==1

  bool grad_allocated() const;
  std::span<const double> grad() const;  // throws NumericError if never populated
  std::span<double> grad_mut();          // zero-fills on first use
  void zero_grad();

  // channel-major blocks, one spatial row per line
  void dump_csv(std::ostream& os) const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  friend class Tape;
  struct Node {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    bool is_leaf = true;
    uint64_t tape_epoch = 0;  // which tape this node is registered on
    int64_t tape_id = -1;     // position in that tape's id space
  };
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

// Momentum-SGD state. Velocity buffers are keyed by parameter order and
// created zero-initialized on the first step.
struct SgdState {
  double learning_rate = 0.0005;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::vector<std::vector<double>> velocity;
};

// v <- momentum*v + (grad + weight_decay*param); param <- param - lr*v.
// Gradients are zeroed afterwards. Throws NumericError if any parameter has
// no populated gradient.
void sgd_step(std::vector<Tensor>& params, SgdState& state);

// Define-by-run recorder. A tape is built fresh for every forward pass; ops
// append backward rules in execution order, so the record list is already
// topologically sorted. backward() walks it once in reverse, visiting only
// records that feed the loss. Gradients accumulate across backward calls
// until explicitly zeroed, which is what mini-batch accumulation relies on.
//
// Single-threaded by construction: one tape per thread, no shared state.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Cross-correlation (no kernel flip). input [c_in,h,w], kernel
  // [c_out,c_in,kh,kw], bias [c_out]. kh/kw must be odd, stride >= 1.
  Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                int padding, int stride);
  Tensor sigmoid(const Tensor& x);
  Tensor relu(const Tensor& x);
  Tensor mul(const Tensor& a, const Tensor& b);
  // f [k,h,w] scaled per-pixel by w [h,w] across all k channels
  Tensor broadcast_mul(const Tensor& f, const Tensor& w);
  // channels of a precede channels of b; spatial dims must match
  Tensor concat_channels(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& x, double factor);
  Tensor sum(const Tensor& x);
  Tensor reshape(const Tensor& x, std::vector<int> shape);
  // logits [classes,h,w], labels h*w entries in [0,classes); mean cell
  // cross-entropy, numerically stable log-sum-exp
  Tensor softmax_cross_entropy(const Tensor& logits, std::span<const uint8_t> labels);

  void backward(const Tensor& loss);

  size_t num_records() const { return records_.size(); }

 private:
  struct Record {
    int64_t output_id;
    std::vector<int64_t> input_ids;
    std::function<void()> apply;
  };

  int64_t register_node(const Tensor& t);
  bool on_tape(const Tensor& t) const;
  Tensor make_output(std::vector<int> shape, bool requires_grad);
  void record(const Tensor& output, std::initializer_list<Tensor> inputs,
              std::function<void()> apply);
  static void check_finite(const Tensor& t, const char* op);

  std::vector<Record> records_;
  uint64_t epoch_;
  int64_t next_id_ = 0;
};

}  // namespace gifnet
