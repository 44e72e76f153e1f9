#include "ltcnet/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace ltcnet {

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_inv_scalar(double y) {
  if (y <= 0.0) throw std::invalid_argument("softplus_inv: argument must be > 0");
  // log(e^y - 1), stable for large y
  if (y > 30.0) return y;
  return std::log(std::expm1(y));
}

Value Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Value Tape::leaf(Tensor v, bool requires_grad) {
  Node n;
  n.value = std::move(v);
  n.op = Op::kLeaf;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

void Tape::require_same_shape(const char* op, Value a, Value b) const {
  if (!nodes_[a.idx].value.same_shape(nodes_[b.idx].value))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                nodes_[a.idx].value.shape_str() + " vs " +
                                nodes_[b.idx].value.shape_str());
}

Value Tape::unary(Op op, Value a, Tensor out, double aux, std::size_t aux_n) {
  Node n;
  n.value = std::move(out);
  n.op = op;
  n.a = a.idx;
  n.aux = aux;
  n.aux_n = aux_n;
  n.requires_grad = nodes_[a.idx].requires_grad;
  return push(std::move(n));
}

Value Tape::binary(Op op, Value a, Value b, Tensor out) {
  Node n;
  n.value = std::move(out);
  n.op = op;
  n.a = a.idx;
  n.b = b.idx;
  n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
  return push(std::move(n));
}

Value Tape::add(Value a, Value b) {
  require_same_shape("add", a, b);
  Tensor out = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  return binary(Op::kAdd, a, b, std::move(out));
}

Value Tape::sub(Value a, Value b) {
  require_same_shape("sub", a, b);
  Tensor out = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
  return binary(Op::kSub, a, b, std::move(out));
}

Value Tape::mul(Value a, Value b) {
  require_same_shape("mul", a, b);
  Tensor out = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  return binary(Op::kMul, a, b, std::move(out));
}

Value Tape::div(Value a, Value b) {
  require_same_shape("div", a, b);
  Tensor out = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= vb[i];
  return binary(Op::kDiv, a, b, std::move(out));
}

Value Tape::matmul(Value a, Value b) {
  const Tensor& va = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  if (va.rank() != 2 || va.shape[1] != vb.rows())
    throw std::invalid_argument("matmul: shape mismatch " + va.shape_str() +
                                " vs " + vb.shape_str());
  std::size_t m = va.rows(), k = va.shape[1], ncols = vb.cols();
  Tensor out = vb.rank() == 1 ? Tensor({m}) : Tensor({m, ncols});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < ncols; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += va.at(i, p) * vb.at(p, j);
      out.data[i * ncols + j] = acc;
    }
  return binary(Op::kMatMul, a, b, std::move(out));
}

Value Tape::sigmoid(Value a) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x = sigmoid_scalar(x);
  return unary(Op::kSigmoid, a, std::move(out));
}

Value Tape::tanh(Value a) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x = std::tanh(x);
  return unary(Op::kTanh, a, std::move(out));
}

Value Tape::relu(Value a) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x = x > 0.0 ? x : 0.0;
  return unary(Op::kRelu, a, std::move(out));
}

Value Tape::softplus(Value a) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x = softplus_scalar(x);
  return unary(Op::kSoftplus, a, std::move(out));
}

Value Tape::scale(Value a, double c) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x *= c;
  return unary(Op::kScale, a, std::move(out), c);
}

Value Tape::add_scalar(Value a, double c) {
  Tensor out = nodes_[a.idx].value;
  for (auto& x : out.data) x += c;
  return unary(Op::kAddScalar, a, std::move(out), c);
}

Value Tape::sum(Value a) {
  double acc = 0.0;
  for (double x : nodes_[a.idx].value.data) acc += x;
  return unary(Op::kSum, a, Tensor::scalar(acc));
}

Value Tape::mean(Value a) {
  const Tensor& va = nodes_[a.idx].value;
  if (va.size() == 0) throw std::invalid_argument("mean: empty tensor");
  double acc = 0.0;
  for (double x : va.data) acc += x;
  return unary(Op::kMean, a, Tensor::scalar(acc / static_cast<double>(va.size())));
}

Value Tape::concat(Value a, Value b) {
  const Tensor& va = nodes_[a.idx].value;
  const Tensor& vb = nodes_[b.idx].value;
  if (va.rank() != 1 || vb.rank() != 1)
    throw std::invalid_argument("concat: rank-1 tensors required, got " +
                                va.shape_str() + " and " + vb.shape_str());
  Tensor out({va.size() + vb.size()});
  for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i];
  for (std::size_t i = 0; i < vb.size(); ++i) out[va.size() + i] = vb[i];
  return binary(Op::kConcat, a, b, std::move(out));
}

Value Tape::slice(Value a, std::size_t start, std::size_t len) {
  const Tensor& va = nodes_[a.idx].value;
  if (va.rank() != 1 || start + len > va.size())
    throw std::invalid_argument("slice: out of range for " + va.shape_str());
  Tensor out({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = va[start + i];
  return unary(Op::kSlice, a, std::move(out), static_cast<double>(start), len);
}

Value Tape::gather(Value a, std::shared_ptr<const std::vector<std::size_t>> idx) {
  const Tensor& va = nodes_[a.idx].value;
  Tensor out({idx->size()});
  for (std::size_t i = 0; i < idx->size(); ++i) {
    if ((*idx)[i] >= va.size())
      throw std::invalid_argument("gather: index out of range for " + va.shape_str());
    out[i] = va[(*idx)[i]];
  }
  Value v = unary(Op::kGather, a, std::move(out));
  nodes_[v.idx].indices = std::move(idx);
  return v;
}

Value Tape::scatter_add(Value a, std::shared_ptr<const std::vector<std::size_t>> idx,
                        std::size_t out_size) {
  const Tensor& va = nodes_[a.idx].value;
  if (idx->size() != va.size())
    throw std::invalid_argument("scatter_add: index count != input size");
  Tensor out({out_size});
  for (std::size_t i = 0; i < va.size(); ++i) {
    if ((*idx)[i] >= out_size)
      throw std::invalid_argument("scatter_add: index out of range");
    out[(*idx)[i]] += va[i];
  }
  Value v = unary(Op::kScatterAdd, a, std::move(out), 0.0, out_size);
  nodes_[v.idx].indices = std::move(idx);
  return v;
}

const Tensor& Tape::grad(Value v) { return grad_ref(v.idx); }

Tensor& Tape::grad_ref(std::uint32_t i) {
  Node& n = nodes_[i];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::accumulate(std::uint32_t parent, const Tensor& g) {
  if (!nodes_[parent].requires_grad) return;
  Tensor& pg = grad_ref(parent);
  for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
}

void Tape::zero_grad() {
  for (auto& n : nodes_) {
    if (n.has_grad)
      for (auto& x : n.grad.data) x = 0.0;
  }
}

void Tape::backward(Value loss) {
  if (nodes_[loss.idx].value.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar-shaped, got " +
                                nodes_[loss.idx].value.shape_str());
  auto is_binary = [](Op op) {
    return op == Op::kAdd || op == Op::kSub || op == Op::kMul ||
           op == Op::kDiv || op == Op::kMatMul || op == Op::kConcat;
  };
  // Mark nodes on a requires_grad path from the loss.
  std::vector<bool> reach(nodes_.size(), false);
  std::vector<std::uint32_t> stack{loss.idx};
  reach[loss.idx] = true;
  while (!stack.empty()) {
    std::uint32_t i = stack.back();
    stack.pop_back();
    const Node& n = nodes_[i];
    if (n.op == Op::kLeaf) continue;
    std::uint32_t parents[2] = {n.a, n.b};
    std::size_t np = is_binary(n.op) ? 2 : 1;
    for (std::size_t j = 0; j < np; ++j) {
      std::uint32_t p = parents[j];
      if (nodes_[p].requires_grad && !reach[p]) {
        reach[p] = true;
        stack.push_back(p);
      }
    }
  }
  // Only leaf gradients accumulate across passes; intermediate nodes get a
  // fresh buffer so a second backward over the same tape stays correct.
  for (auto& n : nodes_) {
    if (n.op != Op::kLeaf && n.has_grad)
      for (auto& x : n.grad.data) x = 0.0;
  }
  grad_ref(loss.idx)[0] += 1.0;
  for (std::uint32_t i = loss.idx + 1; i-- > 0;) {
    if (!reach[i] || !nodes_[i].requires_grad || !nodes_[i].has_grad) continue;
    backward_node(i);
  }
}

void Tape::backward_node(std::uint32_t i) {
  Node& n = nodes_[i];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kAdd:
      accumulate(n.a, g);
      accumulate(n.b, g);
      break;
    case Op::kSub: {
      accumulate(n.a, g);
      if (nodes_[n.b].requires_grad) {
        Tensor& pg = grad_ref(n.b);
        for (std::size_t j = 0; j < g.size(); ++j) pg[j] -= g[j];
      }
      break;
    }
    case Op::kMul: {
      const Tensor& va = nodes_[n.a].value;
      const Tensor& vb = nodes_[n.b].value;
      if (nodes_[n.a].requires_grad) {
        Tensor& pg = grad_ref(n.a);
        for (std::size_t j = 0; j < g.size(); ++j) pg[j] += g[j] * vb[j];
      }
      if (nodes_[n.b].requires_grad) {
        Tensor& pg = grad_ref(n.b);
        for (std::size_t j = 0; j < g.size(); ++j) pg[j] += g[j] * va[j];
      }
      break;
    }
    case Op::kDiv: {
      const Tensor& va = nodes_[n.a].value;
      const Tensor& vb = nodes_[n.b].value;
      if (nodes_[n.a].requires_grad) {
        Tensor& pg = grad_ref(n.a);
        for (std::size_t j = 0; j < g.size(); ++j) pg[j] += g[j] / vb[j];
      }
      if (nodes_[n.b].requires_grad) {
        Tensor& pg = grad_ref(n.b);
        for (std::size_t j = 0; j < g.size(); ++j)
          pg[j] -= g[j] * va[j] / (vb[j] * vb[j]);
      }
      break;
    }
    case Op::kMatMul: {
      const Tensor& va = nodes_[n.a].value;
      const Tensor& vb = nodes_[n.b].value;
      std::size_t m = va.rows(), k = va.shape[1], ncols = vb.cols();
      if (nodes_[n.a].requires_grad) {
        Tensor& pg = grad_ref(n.a);  // g (m,n) * b^T (n,k)
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t c = 0; c < ncols; ++c)
              acc += g.data[r * ncols + c] * vb.at(p, c);
            pg.at(r, p) += acc;
          }
      }
      if (nodes_[n.b].requires_grad) {
        Tensor& pg = grad_ref(n.b);  // a^T (k,m) * g (m,n)
        for (std::size_t p = 0; p < k; ++p)
          for (std::size_t c = 0; c < ncols; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < m; ++r)
              acc += va.at(r, p) * g.data[r * ncols + c];
            pg.data[p * ncols + c] += acc;
          }
      }
      break;
    }
    case Op::kSigmoid: {
      Tensor& pg = grad_ref(n.a);
      const Tensor& out = n.value;
      for (std::size_t j = 0; j < g.size(); ++j)
        pg[j] += g[j] * out[j] * (1.0 - out[j]);
      break;
    }
    case Op::kTanh: {
      Tensor& pg = grad_ref(n.a);
      const Tensor& out = n.value;
      for (std::size_t j = 0; j < g.size(); ++j)
        pg[j] += g[j] * (1.0 - out[j] * out[j]);
      break;
    }
    case Op::kRelu: {
      Tensor& pg = grad_ref(n.a);
      const Tensor& va = nodes_[n.a].value;
      for (std::size_t j = 0; j < g.size(); ++j)
        if (va[j] > 0.0) pg[j] += g[j];
      break;
    }
    case Op::kSoftplus: {
      Tensor& pg = grad_ref(n.a);
      const Tensor& va = nodes_[n.a].value;
      for (std::size_t j = 0; j < g.size(); ++j)
        pg[j] += g[j] * sigmoid_scalar(va[j]);
      break;
    }
    case Op::kScale: {
      Tensor& pg = grad_ref(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) pg[j] += g[j] * n.aux;
      break;
    }
    case Op::kAddScalar:
      accumulate(n.a, g);
      break;
    case Op::kSum: {
      Tensor& pg = grad_ref(n.a);
      for (auto& x : pg.data) x += g[0];
      break;
    }
    case Op::kMean: {
      Tensor& pg = grad_ref(n.a);
      double s = g[0] / static_cast<double>(pg.size());
      for (auto& x : pg.data) x += s;
      break;
    }
    case Op::kConcat: {
      std::size_t na = nodes_[n.a].value.size();
      if (nodes_[n.a].requires_grad) {
        Tensor& pg = grad_ref(n.a);
        for (std::size_t j = 0; j < na; ++j) pg[j] += g[j];
      }
      if (nodes_[n.b].requires_grad) {
        Tensor& pg = grad_ref(n.b);
        for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += g[na + j];
      }
      break;
    }
    case Op::kSlice: {
      Tensor& pg = grad_ref(n.a);
      std::size_t start = static_cast<std::size_t>(n.aux);
      for (std::size_t j = 0; j < n.aux_n; ++j) pg[start + j] += g[j];
      break;
    }
    case Op::kGather: {
      Tensor& pg = grad_ref(n.a);
      const auto& idx = *n.indices;
      for (std::size_t j = 0; j < idx.size(); ++j) pg[idx[j]] += g[j];
      break;
    }
    case Op::kScatterAdd: {
      Tensor& pg = grad_ref(n.a);
      const auto& idx = *n.indices;
      for (std::size_t j = 0; j < idx.size(); ++j) pg[j] += g[idx[j]];
      break;
    }
  }
}

}  // namespace ltcnet
