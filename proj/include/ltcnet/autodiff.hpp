#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ltcnet/tensor.hpp"

namespace ltcnet {

// Handle into a Tape's node list.
struct Value {
  std::uint32_t idx = 0;
};

double sigmoid_scalar(double x);
double softplus_scalar(double x);
// Inverse of softplus; y must be > 0.
double softplus_inv_scalar(double y);

// Tape-based reverse-mode autodiff. A tape is built during one forward
// pass and discarded after backward; it is single-threaded by contract.
class Tape {
 public:
  Value leaf(Tensor v, bool requires_grad = true);
  Value constant(Tensor v) { return leaf(std::move(v), false); }

  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);        // elementwise
  Value div(Value a, Value b);        // elementwise
  Value matmul(Value a, Value b);     // (m,k)x(k,n) or (m,k)x(k,)
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value relu(Value a);
  Value softplus(Value a);
  Value scale(Value a, double c);
  Value add_scalar(Value a, double c);
  Value sum(Value a);                 // -> scalar
  Value mean(Value a);                // -> scalar
  Value concat(Value a, Value b);     // rank-1 only
  Value slice(Value a, std::size_t start, std::size_t len);  // rank-1
  Value gather(Value a, std::shared_ptr<const std::vector<std::size_t>> idx);
  Value scatter_add(Value a, std::shared_ptr<const std::vector<std::size_t>> idx,
                    std::size_t out_size);

  const Tensor& value(Value v) const { return nodes_[v.idx].value; }
  // Valid after backward; zero tensor if the node was never reached.
  const Tensor& grad(Value v);

  // Accumulates into existing grads; call zero_grad between passes for
  // fresh gradients. loss must be scalar-shaped.
  void backward(Value loss);
  void zero_grad();

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kAdd, kSub, kMul, kDiv, kMatMul, kSigmoid, kTanh, kRelu,
    kSoftplus, kScale, kAddScalar, kSum, kMean, kConcat, kSlice,
    kGather, kScatterAdd
  };

  struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily during backward
    Op op = Op::kLeaf;
    std::uint32_t a = 0, b = 0;
    double aux = 0.0;
    std::size_t aux_n = 0;
    std::shared_ptr<const std::vector<std::size_t>> indices;
    bool requires_grad = false;
    bool has_grad = false;
  };

  Value push(Node n);
  Value unary(Op op, Value a, Tensor out, double aux = 0.0, std::size_t aux_n = 0);
  Value binary(Op op, Value a, Value b, Tensor out);
  void require_same_shape(const char* op, Value a, Value b) const;
  Tensor& grad_ref(std::uint32_t i);
  void accumulate(std::uint32_t parent, const Tensor& g);
  void backward_node(std::uint32_t i);

  std::vector<Node> nodes_;
};

}  // namespace ltcnet
