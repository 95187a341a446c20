#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "miniens/rng.hpp"

namespace miniens::tensor {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::int64_t shape_numel(const Shape& s);

// Graph node behind a Tensor handle. Values are 64-bit floats, row-major.
// Every op validates its output for NaN/Inf and fails fast.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily, same length as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(const Node&)> backprop;
    const char* op = "leaf";

    std::int64_t numel() const { return static_cast<std::int64_t>(value.size()); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Value-semantics handle to a shared graph node.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v);
    static Tensor from_data(Shape shape, std::vector<double> data);
    // Gaussian init, mean 0.
    static Tensor randn(Shape shape, Rng& rng, double stddev);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    std::int64_t numel() const { return node_->numel(); }
    int dim(int i) const;

    double item() const;  // scalar tensors only
    std::span<const double> data() const { return node_->value; }
    std::span<double> mutable_data() { return node_->value; }

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool v);
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();

    const std::shared_ptr<Node>& node() const { return node_; }
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<Node> node_;
};

// Reverse-mode sweep from a scalar loss; accumulates into .grad of every
// reachable node with requires_grad. Throws GraphDetached when the loss has
// no recorded graph.
void backward(const Tensor& loss);

// --- ops (forward value + recorded backward closure) ---

// a: [..., m, k] with b: [k, n] (shared weight) or b: [..., k, n] with
// identical leading dims.
Tensor matmul(const Tensor& a, const Tensor& b);
// Same shapes, or b's shape a strict suffix of a's (broadcast over the
// leading axes, e.g. bias [d] against [batch, seq, d]).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double c);
Tensor transpose(const Tensor& a);  // swaps the last two axes
Tensor swap_axes(const Tensor& a, int axis0, int axis1);
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat_last_dim(const Tensor& a, const Tensor& b);
Tensor slice(const Tensor& a, int axis, int start, int len);
Tensor mean_axis(const Tensor& a, int axis);

Tensor softmax(const Tensor& x, int axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor gelu(const Tensor& x);
Tensor tanh(const Tensor& x);
// Inverted dropout; identity when training is false. Draws one uniform per
// element from rng in row-major order.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

// table: [vocab, d]; ids row-major [batch, seq] -> [batch, seq, d].
Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids, int batch, int seq);

// Mean over rows of -log softmax(logits)[target]; targets in [0, classes).
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);
// Mean over all entries of max(z,0) - z*t + log(1 + exp(-|z|)); targets must
// be a constant 0/1 tensor of the same shape.
Tensor bce_with_logits(const Tensor& logits, const Tensor& one_hot);

}  // namespace miniens::tensor
