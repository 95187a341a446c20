#include "miniens/tensor/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "miniens/error.hpp"

namespace miniens::tensor {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (const int d : s) n *= d;
    return n;
}

namespace {

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> data) {
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size())) {
        throw ShapeMismatch("data length " + std::to_string(data.size()) +
                            " does not match shape " + shape_str(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(data);
    return n;
}

}  // namespace

Tensor Tensor::zeros(Shape shape) {
    const auto n = shape_numel(shape);
    return Tensor(make_leaf(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0)));
}

Tensor Tensor::full(Shape shape, double v) {
    const auto n = shape_numel(shape);
    return Tensor(make_leaf(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), v)));
}

Tensor Tensor::scalar(double v) { return from_data({1}, {v}); }

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    return Tensor(make_leaf(std::move(shape), std::move(data)));
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stddev) {
    const auto n = shape_numel(shape);
    std::vector<double> data(static_cast<std::size_t>(n));
    for (auto& v : data) v = rng.next_normal() * stddev;
    return Tensor(make_leaf(std::move(shape), std::move(data)));
}

int Tensor::dim(int i) const {
    if (i < 0) i += ndim();
    return node_->shape[static_cast<std::size_t>(i)];
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeMismatch("item() needs a scalar, got " + shape_str(shape()));
    return node_->value[0];
}

Tensor& Tensor::set_requires_grad(bool v) {
    node_->requires_grad = v;
    return *this;
}

std::span<const double> Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ShapeMismatch("backward needs a scalar loss");
    }
    Node* root = loss.node().get();
    if (!root->requires_grad) {
        throw GraphDetached("loss has no recorded graph");
    }

    // Iterative post-order DFS over the requires_grad subgraph.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    visited.insert(root);
    while (!stack.empty()) {
        Node* node = stack.back().first;
        const std::size_t idx = stack.back().second;
        if (idx < node->parents.size()) {
            ++stack.back().second;
            Node* p = node->parents[idx].get();
            if (p->requires_grad && !visited.contains(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backprop) (*it)->backprop(**it);
    }
}

}  // namespace miniens::tensor
