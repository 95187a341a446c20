#include <algorithm>
#include <cmath>
#include <numbers>

#include "miniens/error.hpp"
#include "miniens/tensor/tensor.hpp"

namespace miniens::tensor {

namespace {

std::shared_ptr<Node> make_op(const char* op, Shape shape,
                              std::vector<std::shared_ptr<Node>> parents) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->shape = std::move(shape);
    n->value.assign(static_cast<std::size_t>(shape_numel(n->shape)), 0.0);
    n->parents = std::move(parents);
    for (const auto& p : n->parents) {
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    }
    return n;
}

Tensor finish(std::shared_ptr<Node> n) {
    for (const double v : n->value) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string("non-finite value produced by op '") + n->op + "'");
        }
    }
    return Tensor(std::move(n));
}

// Collapses a shape into [outer, dim, inner] around one axis.
struct AxisView {
    std::int64_t outer, dim, inner;
};

AxisView axis_view(const Shape& s, int axis) {
    AxisView v{1, s[static_cast<std::size_t>(axis)], 1};
    for (int i = 0; i < axis; ++i) v.outer *= s[static_cast<std::size_t>(i)];
    for (int i = axis + 1; i < static_cast<int>(s.size()); ++i) v.inner *= s[static_cast<std::size_t>(i)];
    return v;
}

int normalize_axis(const Tensor& t, int axis, const char* op) {
    if (axis < 0) axis += t.ndim();
    if (axis < 0 || axis >= t.ndim()) {
        throw ShapeMismatch(std::string(op) + ": axis out of range for " + shape_str(t.shape()));
    }
    return axis;
}

// c[m,n] += a[m,k] * b[k,n]
void mm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::ptrdiff_t>(i) * k;
        double* ci = c + static_cast<std::ptrdiff_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            const double* bk = b + static_cast<std::ptrdiff_t>(kk) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

// c[m,k] += g[m,n] * b[k,n]^T
void mm_nt_acc(const double* g, const double* b, double* c, int m, int n, int k) {
    for (int i = 0; i < m; ++i) {
        const double* gi = g + static_cast<std::ptrdiff_t>(i) * n;
        double* ci = c + static_cast<std::ptrdiff_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double* bk = b + static_cast<std::ptrdiff_t>(kk) * n;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += gi[j] * bk[j];
            ci[kk] += s;
        }
    }
}

// c[k,n] += a[m,k]^T * g[m,n]
void mm_tn_acc(const double* a, const double* g, double* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* ai = a + static_cast<std::ptrdiff_t>(i) * k;
        const double* gi = g + static_cast<std::ptrdiff_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const double av = ai[kk];
            double* ck = c + static_cast<std::ptrdiff_t>(kk) * n;
            for (int j = 0; j < n; ++j) ck[j] += av * gi[j];
        }
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() < 2 || b.ndim() < 2) {
        throw ShapeMismatch("matmul needs >=2-d operands, got " + shape_str(a.shape()) + " and " +
                            shape_str(b.shape()));
    }
    const bool shared_rhs = b.ndim() == 2 && a.ndim() >= 2;
    const bool batched = !shared_rhs && a.ndim() == b.ndim() &&
                         std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin());
    if (!shared_rhs && !batched) {
        throw ShapeMismatch("matmul: incompatible operands " + shape_str(a.shape()) + " and " +
                            shape_str(b.shape()));
    }
    const int m = a.dim(-2);
    const int k = a.dim(-1);
    if (b.dim(-2) != k) {
        throw ShapeMismatch("matmul: inner dims differ, " + shape_str(a.shape()) + " vs " +
                            shape_str(b.shape()));
    }
    const int n = b.dim(-1);
    const std::int64_t batches = a.numel() / (static_cast<std::int64_t>(m) * k);

    Shape out_shape = a.shape();
    out_shape.back() = n;
    auto node = make_op("matmul", std::move(out_shape), {a.node(), b.node()});

    const double* ap = a.data().data();
    const double* bp = b.data().data();
    for (std::int64_t s = 0; s < batches; ++s) {
        mm_acc(ap + s * m * k, shared_rhs ? bp : bp + s * static_cast<std::int64_t>(k) * n,
               node->value.data() + s * m * n, m, k, n);
    }

    if (node->requires_grad) {
        auto pa = a.node();
        auto pb = b.node();
        node->backprop = [pa, pb, m, k, n, batches, shared_rhs](const Node& self) {
            const double* g = self.grad.data();
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (std::int64_t s = 0; s < batches; ++s) {
                    mm_nt_acc(g + s * m * n,
                              shared_rhs ? pb->value.data()
                                         : pb->value.data() + s * static_cast<std::int64_t>(k) * n,
                              pa->grad.data() + s * m * k, m, n, k);
                }
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (std::int64_t s = 0; s < batches; ++s) {
                    mm_tn_acc(pa->value.data() + s * m * k, g + s * m * n,
                              shared_rhs ? pb->grad.data()
                                         : pb->grad.data() + s * static_cast<std::int64_t>(k) * n,
                              m, k, n);
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor add(const Tensor& a, const Tensor& b) {
    const bool same = a.shape() == b.shape();
    bool suffix = false;
    if (!same && b.ndim() < a.ndim()) {
        suffix = std::equal(b.shape().begin(), b.shape().end(),
                            a.shape().end() - b.ndim());
    }
    if (!same && !suffix) {
        throw ShapeMismatch("add: incompatible shapes " + shape_str(a.shape()) + " and " +
                            shape_str(b.shape()));
    }
    auto node = make_op("add", a.shape(), {a.node(), b.node()});
    const auto av = a.data();
    const auto bv = b.data();
    const std::size_t bn = bv.size();
    for (std::size_t i = 0; i < av.size(); ++i) node->value[i] = av[i] + bv[i % bn];

    if (node->requires_grad) {
        auto pa = a.node();
        auto pb = b.node();
        node->backprop = [pa, pb, bn](const Node& self) {
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i % bn] += self.grad[i];
            }
        };
    }
    return finish(std::move(node));
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeMismatch("mul: shapes differ, " + shape_str(a.shape()) + " vs " +
                            shape_str(b.shape()));
    }
    auto node = make_op("mul", a.shape(), {a.node(), b.node()});
    for (std::size_t i = 0; i < node->value.size(); ++i) node->value[i] = a.data()[i] * b.data()[i];
    if (node->requires_grad) {
        auto pa = a.node();
        auto pb = b.node();
        node->backprop = [pa, pb](const Node& self) {
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i)
                    pa->grad[i] += self.grad[i] * pb->value[i];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (std::size_t i = 0; i < self.grad.size(); ++i)
                    pb->grad[i] += self.grad[i] * pa->value[i];
            }
        };
    }
    return finish(std::move(node));
}

Tensor scale(const Tensor& a, double c) {
    auto node = make_op("scale", a.shape(), {a.node()});
    for (std::size_t i = 0; i < node->value.size(); ++i) node->value[i] = a.data()[i] * c;
    if (node->requires_grad) {
        auto pa = a.node();
        node->backprop = [pa, c](const Node& self) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * c;
        };
    }
    return finish(std::move(node));
}

Tensor transpose(const Tensor& a) {
    if (a.ndim() < 2) throw ShapeMismatch("transpose needs >=2-d, got " + shape_str(a.shape()));
    return swap_axes(a, a.ndim() - 2, a.ndim() - 1);
}

Tensor swap_axes(const Tensor& a, int axis0, int axis1) {
    const int i = normalize_axis(a, axis0, "swap_axes");
    const int j = normalize_axis(a, axis1, "swap_axes");
    Shape out_shape = a.shape();
    std::swap(out_shape[static_cast<std::size_t>(i)], out_shape[static_cast<std::size_t>(j)]);

    const int nd = a.ndim();
    std::vector<std::int64_t> out_strides(static_cast<std::size_t>(nd), 1);
    for (int d = nd - 2; d >= 0; --d) {
        out_strides[static_cast<std::size_t>(d)] =
            out_strides[static_cast<std::size_t>(d + 1)] * out_shape[static_cast<std::size_t>(d + 1)];
    }
    const Shape in_shape = a.shape();

    // out_index(p) for input linear index p, with axes i and j swapped.
    auto mapping = [in_shape, out_strides, i, j, nd](std::int64_t p) {
        std::int64_t out_idx = 0;
        for (int d = nd - 1; d >= 0; --d) {
            const std::int64_t dim = in_shape[static_cast<std::size_t>(d)];
            const std::int64_t coord = p % dim;
            p /= dim;
            int od = d;
            if (d == i) {
                od = j;
            } else if (d == j) {
                od = i;
            }
            out_idx += coord * out_strides[static_cast<std::size_t>(od)];
        }
        return out_idx;
    };

    auto node = make_op("swap_axes", std::move(out_shape), {a.node()});
    const auto av = a.data();
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(av.size()); ++p) {
        node->value[static_cast<std::size_t>(mapping(p))] = av[static_cast<std::size_t>(p)];
    }
    if (node->requires_grad) {
        auto pa = a.node();
        node->backprop = [pa, mapping](const Node& self) {
            pa->ensure_grad();
            for (std::int64_t p = 0; p < static_cast<std::int64_t>(pa->grad.size()); ++p) {
                pa->grad[static_cast<std::size_t>(p)] +=
                    self.grad[static_cast<std::size_t>(mapping(p))];
            }
        };
    }
    return finish(std::move(node));
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeMismatch("reshape: cannot view " + shape_str(a.shape()) + " as " +
                            shape_str(shape));
    }
    auto node = make_op("reshape", std::move(shape), {a.node()});
    std::copy(a.data().begin(), a.data().end(), node->value.begin());
    if (node->requires_grad) {
        auto pa = a.node();
        node->backprop = [pa](const Node& self) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        };
    }
    return finish(std::move(node));
}

Tensor concat_last_dim(const Tensor& a, const Tensor& b) {
    if (a.ndim() != b.ndim() || a.ndim() < 1 ||
        !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
        throw ShapeMismatch("concat_last_dim: incompatible shapes " + shape_str(a.shape()) +
                            " and " + shape_str(b.shape()));
    }
    const std::int64_t da = a.dim(-1);
    const std::int64_t db = b.dim(-1);
    const std::int64_t rows = a.numel() / da;
    Shape out_shape = a.shape();
    out_shape.back() = static_cast<int>(da + db);
    auto node = make_op("concat_last_dim", std::move(out_shape), {a.node(), b.node()});
    for (std::int64_t r = 0; r < rows; ++r) {
        std::copy_n(a.data().data() + r * da, da, node->value.data() + r * (da + db));
        std::copy_n(b.data().data() + r * db, db, node->value.data() + r * (da + db) + da);
    }
    if (node->requires_grad) {
        auto pa = a.node();
        auto pb = b.node();
        node->backprop = [pa, pb, da, db, rows](const Node& self) {
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* g = self.grad.data() + r * (da + db);
                if (pa->requires_grad) {
                    pa->ensure_grad();
                    for (std::int64_t c = 0; c < da; ++c) pa->grad[static_cast<std::size_t>(r * da + c)] += g[c];
                }
                if (pb->requires_grad) {
                    pb->ensure_grad();
                    for (std::int64_t c = 0; c < db; ++c) pb->grad[static_cast<std::size_t>(r * db + c)] += g[da + c];
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor slice(const Tensor& a, int axis, int start, int len) {
    const int ax = normalize_axis(a, axis, "slice");
    const auto view = axis_view(a.shape(), ax);
    if (start < 0 || len < 0 || start + len > view.dim) {
        throw ShapeMismatch("slice: range [" + std::to_string(start) + "," +
                            std::to_string(start + len) + ") outside axis of extent " +
                            std::to_string(view.dim));
    }
    Shape out_shape = a.shape();
    out_shape[static_cast<std::size_t>(ax)] = len;
    auto node = make_op("slice", std::move(out_shape), {a.node()});
    const double* av = a.data().data();
    for (std::int64_t o = 0; o < view.outer; ++o) {
        const double* src = av + (o * view.dim + start) * view.inner;
        double* dst = node->value.data() + o * len * view.inner;
        std::copy_n(src, static_cast<std::int64_t>(len) * view.inner, dst);
    }
    if (node->requires_grad) {
        auto pa = a.node();
        node->backprop = [pa, view, start, len](const Node& self) {
            pa->ensure_grad();
            for (std::int64_t o = 0; o < view.outer; ++o) {
                const double* g = self.grad.data() + o * len * view.inner;
                double* dst = pa->grad.data() + (o * view.dim + start) * view.inner;
                for (std::int64_t t = 0; t < static_cast<std::int64_t>(len) * view.inner; ++t) dst[t] += g[t];
            }
        };
    }
    return finish(std::move(node));
}

Tensor mean_axis(const Tensor& a, int axis) {
    const int ax = normalize_axis(a, axis, "mean_axis");
    const auto view = axis_view(a.shape(), ax);
    Shape out_shape;
    for (int d = 0; d < a.ndim(); ++d) {
        if (d != ax) out_shape.push_back(a.dim(d));
    }
    if (out_shape.empty()) out_shape.push_back(1);
    auto node = make_op("mean_axis", std::move(out_shape), {a.node()});
    const double* av = a.data().data();
    for (std::int64_t o = 0; o < view.outer; ++o) {
        for (std::int64_t t = 0; t < view.dim; ++t) {
            const double* src = av + (o * view.dim + t) * view.inner;
            double* dst = node->value.data() + o * view.inner;
            for (std::int64_t i = 0; i < view.inner; ++i) dst[i] += src[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(view.dim);
    for (auto& v : node->value) v *= inv;
    if (node->requires_grad) {
        auto pa = a.node();
        node->backprop = [pa, view, inv](const Node& self) {
            pa->ensure_grad();
            for (std::int64_t o = 0; o < view.outer; ++o) {
                const double* g = self.grad.data() + o * view.inner;
                for (std::int64_t t = 0; t < view.dim; ++t) {
                    double* dst = pa->grad.data() + (o * view.dim + t) * view.inner;
                    for (std::int64_t i = 0; i < view.inner; ++i) dst[i] += g[i] * inv;
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor softmax(const Tensor& x, int axis) {
    const int ax = normalize_axis(x, axis, "softmax");
    const auto view = axis_view(x.shape(), ax);
    auto node = make_op("softmax", x.shape(), {x.node()});
    const double* xv = x.data().data();
    for (std::int64_t o = 0; o < view.outer; ++o) {
        for (std::int64_t i = 0; i < view.inner; ++i) {
            const std::int64_t base = o * view.dim * view.inner + i;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::int64_t t = 0; t < view.dim; ++t) {
                mx = std::max(mx, xv[base + t * view.inner]);
            }
            double sum = 0.0;
            for (std::int64_t t = 0; t < view.dim; ++t) {
                const double e = std::exp(xv[base + t * view.inner] - mx);
                node->value[static_cast<std::size_t>(base + t * view.inner)] = e;
                sum += e;
            }
            for (std::int64_t t = 0; t < view.dim; ++t) {
                node->value[static_cast<std::size_t>(base + t * view.inner)] /= sum;
            }
        }
    }
    if (node->requires_grad) {
        auto pa = x.node();
        node->backprop = [pa, view](const Node& self) {
            pa->ensure_grad();
            for (std::int64_t o = 0; o < view.outer; ++o) {
                for (std::int64_t i = 0; i < view.inner; ++i) {
                    const std::int64_t base = o * view.dim * view.inner + i;
                    double dot = 0.0;
                    for (std::int64_t t = 0; t < view.dim; ++t) {
                        const auto p = static_cast<std::size_t>(base + t * view.inner);
                        dot += self.grad[p] * self.value[p];
                    }
                    for (std::int64_t t = 0; t < view.dim; ++t) {
                        const auto p = static_cast<std::size_t>(base + t * view.inner);
                        pa->grad[p] += self.value[p] * (self.grad[p] - dot);
                    }
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const int d = x.dim(-1);
    if (gain.ndim() != 1 || bias.ndim() != 1 || gain.dim(0) != d || bias.dim(0) != d) {
        throw ShapeMismatch("layer_norm: gain/bias must be [" + std::to_string(d) + "], got " +
                            shape_str(gain.shape()) + " and " + shape_str(bias.shape()));
    }
    const std::int64_t rows = x.numel() / d;
    auto node = make_op("layer_norm", x.shape(), {x.node(), gain.node(), bias.node()});
    std::vector<double> rstd(static_cast<std::size_t>(rows));
    std::vector<double> mean(static_cast<std::size_t>(rows));
    const double* xv = x.data().data();
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* row = xv + r * d;
        double mu = 0.0;
        for (int c = 0; c < d; ++c) mu += row[c];
        mu /= d;
        double var = 0.0;
        for (int c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
        var /= d;
        const double rs = 1.0 / std::sqrt(var + eps);
        mean[static_cast<std::size_t>(r)] = mu;
        rstd[static_cast<std::size_t>(r)] = rs;
        for (int c = 0; c < d; ++c) {
            node->value[static_cast<std::size_t>(r * d + c)] =
                gain.data()[static_cast<std::size_t>(c)] * (row[c] - mu) * rs +
                bias.data()[static_cast<std::size_t>(c)];
        }
    }
    if (node->requires_grad) {
        auto px = x.node();
        auto pg = gain.node();
        auto pb = bias.node();
        node->backprop = [px, pg, pb, rows, d, mean = std::move(mean),
                          rstd = std::move(rstd)](const Node& self) {
            if (px->requires_grad) px->ensure_grad();
            if (pg->requires_grad) pg->ensure_grad();
            if (pb->requires_grad) pb->ensure_grad();
            for (std::int64_t r = 0; r < rows; ++r) {
                const double* xrow = px->value.data() + r * d;
                const double* grow = self.grad.data() + r * d;
                const double mu = mean[static_cast<std::size_t>(r)];
                const double rs = rstd[static_cast<std::size_t>(r)];
                double m1 = 0.0, m2 = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double xhat = (xrow[c] - mu) * rs;
                    const double dxhat = grow[c] * pg->value[static_cast<std::size_t>(c)];
                    m1 += dxhat;
                    m2 += dxhat * xhat;
                }
                m1 /= d;
                m2 /= d;
                for (int c = 0; c < d; ++c) {
                    const double xhat = (xrow[c] - mu) * rs;
                    if (px->requires_grad) {
                        const double dxhat = grow[c] * pg->value[static_cast<std::size_t>(c)];
                        px->grad[static_cast<std::size_t>(r * d + c)] +=
                            rs * (dxhat - m1 - xhat * m2);
                    }
                    if (pg->requires_grad) pg->grad[static_cast<std::size_t>(c)] += grow[c] * xhat;
                    if (pb->requires_grad) pb->grad[static_cast<std::size_t>(c)] += grow[c];
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor gelu(const Tensor& x) {
    auto node = make_op("gelu", x.shape(), {x.node()});
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    for (std::size_t i = 0; i < node->value.size(); ++i) {
        const double v = x.data()[i];
        node->value[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    if (node->requires_grad) {
        auto pa = x.node();
        node->backprop = [pa](const Node& self) {
            pa->ensure_grad();
            constexpr double is2 = std::numbers::sqrt2 / 2.0;
            const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                const double v = pa->value[i];
                const double cdf = 0.5 * (1.0 + std::erf(v * is2));
                const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
                pa->grad[i] += self.grad[i] * (cdf + v * pdf);
            }
        };
    }
    return finish(std::move(node));
}

Tensor tanh(const Tensor& x) {
    auto node = make_op("tanh", x.shape(), {x.node()});
    for (std::size_t i = 0; i < node->value.size(); ++i) node->value[i] = std::tanh(x.data()[i]);
    if (node->requires_grad) {
        auto pa = x.node();
        node->backprop = [pa](const Node& self) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) {
                pa->grad[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
            }
        };
    }
    return finish(std::move(node));
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
    if (p < 0.0 || p >= 1.0) {
        throw InvalidArgument("dropout probability must be in [0,1), got " + std::to_string(p));
    }
    if (!training || p == 0.0) return x;

    auto node = make_op("dropout", x.shape(), {x.node()});
    std::vector<double> mask(node->value.size());
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng.next_double() >= p ? keep_scale : 0.0;
        node->value[i] = x.data()[i] * mask[i];
    }
    if (node->requires_grad) {
        auto pa = x.node();
        node->backprop = [pa, mask = std::move(mask)](const Node& self) {
            pa->ensure_grad();
            for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * mask[i];
        };
    }
    return finish(std::move(node));
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids, int batch, int seq) {
    if (table.ndim() != 2) {
        throw ShapeMismatch("embedding_lookup: table must be 2-d, got " + shape_str(table.shape()));
    }
    if (static_cast<std::int64_t>(ids.size()) != static_cast<std::int64_t>(batch) * seq) {
        throw ShapeMismatch("embedding_lookup: ids length " + std::to_string(ids.size()) +
                            " != batch*seq " + std::to_string(batch * seq));
    }
    const int vocab = table.dim(0);
    const int d = table.dim(1);
    for (const int id : ids) {
        if (id < 0 || id >= vocab) {
            throw IdOutOfRange("token id " + std::to_string(id) + " outside embedding table of " +
                               std::to_string(vocab) + " rows");
        }
    }
    auto node = make_op("embedding_lookup", {batch, seq, d}, {table.node()});
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
        std::copy_n(table.data().data() + static_cast<std::int64_t>(ids[pos]) * d, d,
                    node->value.data() + static_cast<std::int64_t>(pos) * d);
    }
    if (node->requires_grad) {
        auto pt = table.node();
        node->backprop = [pt, ids, d](const Node& self) {
            pt->ensure_grad();
            for (std::size_t pos = 0; pos < ids.size(); ++pos) {
                const double* g = self.grad.data() + static_cast<std::int64_t>(pos) * d;
                double* dst = pt->grad.data() + static_cast<std::int64_t>(ids[pos]) * d;
                for (int c = 0; c < d; ++c) dst[c] += g[c];
            }
        };
    }
    return finish(std::move(node));
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
    if (logits.ndim() != 2) {
        throw ShapeMismatch("cross_entropy: logits must be [batch, classes], got " +
                            shape_str(logits.shape()));
    }
    const int batch = logits.dim(0);
    const int classes = logits.dim(1);
    if (static_cast<int>(targets.size()) != batch) {
        throw LengthMismatch("cross_entropy: " + std::to_string(targets.size()) +
                             " targets for batch of " + std::to_string(batch));
    }
    for (const int t : targets) {
        if (t < 0 || t >= classes) {
            throw InvalidArgument("cross_entropy: target " + std::to_string(t) + " outside [0," +
                                  std::to_string(classes) + ")");
        }
    }

    auto node = make_op("cross_entropy", {1}, {logits.node()});
    std::vector<double> probs(static_cast<std::size_t>(batch) * classes);
    double total = 0.0;
    const double* z = logits.data().data();
    for (int b = 0; b < batch; ++b) {
        const double* row = z + static_cast<std::int64_t>(b) * classes;
        double mx = row[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < classes; ++c) {
            const double e = std::exp(row[c] - mx);
            probs[static_cast<std::size_t>(b * classes + c)] = e;
            sum += e;
        }
        for (int c = 0; c < classes; ++c) probs[static_cast<std::size_t>(b * classes + c)] /= sum;
        total += mx + std::log(sum) - row[targets[static_cast<std::size_t>(b)]];
    }
    node->value[0] = total / batch;

    if (node->requires_grad) {
        auto pl = logits.node();
        node->backprop = [pl, targets, probs = std::move(probs), batch, classes](const Node& self) {
            pl->ensure_grad();
            const double g = self.grad[0] / batch;
            for (int b = 0; b < batch; ++b) {
                for (int c = 0; c < classes; ++c) {
                    const auto i = static_cast<std::size_t>(b * classes + c);
                    const double onehot = c == targets[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
                    pl->grad[i] += g * (probs[i] - onehot);
                }
            }
        };
    }
    return finish(std::move(node));
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& one_hot) {
    if (logits.shape() != one_hot.shape()) {
        throw ShapeMismatch("bce_with_logits: shapes differ, " + shape_str(logits.shape()) +
                            " vs " + shape_str(one_hot.shape()));
    }
    if (one_hot.requires_grad()) {
        throw InvalidArgument("bce_with_logits: targets must be constant");
    }
    for (const double t : one_hot.data()) {
        if (t != 0.0 && t != 1.0) {
            throw InvalidArgument("bce_with_logits: targets must be 0 or 1, got " +
                                  std::to_string(t));
        }
    }
    const std::int64_t n = logits.numel();
    auto node = make_op("bce_with_logits", {1}, {logits.node(), one_hot.node()});
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double z = logits.data()[static_cast<std::size_t>(i)];
        const double t = one_hot.data()[static_cast<std::size_t>(i)];
        total += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    }
    node->value[0] = total / static_cast<double>(n);

    if (node->requires_grad) {
        auto pl = logits.node();
        auto pt = one_hot.node();
        node->backprop = [pl, pt, n](const Node& self) {
            pl->ensure_grad();
            const double g = self.grad[0] / static_cast<double>(n);
            for (std::int64_t i = 0; i < n; ++i) {
                const double z = pl->value[static_cast<std::size_t>(i)];
                const double sig = 1.0 / (1.0 + std::exp(-z));
                pl->grad[static_cast<std::size_t>(i)] +=
                    g * (sig - pt->value[static_cast<std::size_t>(i)]);
            }
        };
    }
    return finish(std::move(node));
}

}  // namespace miniens::tensor
