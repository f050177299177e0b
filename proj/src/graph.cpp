#include "jca/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "jca/kernels.hpp"

namespace jca {

namespace {
const kernels::Kernels& K() { return kernels::active(); }
}  // namespace

NodeId Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return NodeId{nodes_.size() - 1};
}

NodeId Graph::leaf(Mat value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.op = Op::leaf;
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (av.cols() != bv.rows()) {
        throw DimError("matmul: " + av.shape_str() + " * " + bv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), bv.cols());
    K().gemm_nn(av.data(), bv.data(), n.value.data(), av.rows(), av.cols(), bv.cols());
    n.op = Op::matmul;
    n.p0 = a;
    n.p1 = b;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::transpose(NodeId a) {
    Node n;
    n.value = value(a).transposed();
    n.op = Op::transpose;
    n.p0 = a;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (!av.same_shape(bv)) {
        throw DimError("add: " + av.shape_str() + " vs " + bv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), av.cols());
    K().add(av.data(), bv.data(), n.value.data(), av.size());
    n.op = Op::add;
    n.p0 = a;
    n.p1 = b;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (!av.same_shape(bv)) {
        throw DimError("sub: " + av.shape_str() + " vs " + bv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), av.cols());
    K().sub(av.data(), bv.data(), n.value.data(), av.size());
    n.op = Op::sub;
    n.p0 = a;
    n.p1 = b;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::hadamard(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (!av.same_shape(bv)) {
        throw DimError("hadamard: " + av.shape_str() + " vs " + bv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), av.cols());
    K().mul(av.data(), bv.data(), n.value.data(), av.size());
    n.op = Op::hadamard;
    n.p0 = a;
    n.p1 = b;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::div(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (!av.same_shape(bv)) {
        throw DimError("div: " + av.shape_str() + " vs " + bv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] / bv[i];
    n.op = Op::div;
    n.p0 = a;
    n.p1 = b;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::tanh(NodeId a) {
    const Mat& av = value(a);
    Node n;
    n.value = Mat(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = std::tanh(av[i]);
    n.op = Op::tanh_;
    n.p0 = a;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::relu(NodeId a) {
    const Mat& av = value(a);
    Node n;
    n.value = Mat(av.rows(), av.cols());
    K().relu(av.data(), n.value.data(), av.size());
    n.op = Op::relu_;
    n.p0 = a;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (av.rows() != bv.rows()) {
        throw DimError("concat_cols: row mismatch " + av.shape_str() + " vs " +
                       bv.shape_str());
    }
    Node n;
    n.value = hcat(av, bv);
    n.op = Op::concat_cols;
    n.p0 = a;
    n.p1 = b;
    n.aux0 = av.cols();  // seam
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::concat_rows(NodeId a, NodeId b) {
    const Mat& av = value(a);
    const Mat& bv = value(b);
    if (av.cols() != bv.cols()) {
        throw DimError("concat_rows: column mismatch " + av.shape_str() + " vs " +
                       bv.shape_str());
    }
    Node n;
    n.value = vcat(av, bv);
    n.op = Op::concat_rows;
    n.p0 = a;
    n.p1 = b;
    n.aux0 = av.rows();  // seam
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[b.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::slice_cols(NodeId a, std::size_t c0, std::size_t c1) {
    Node n;
    n.value = value(a).slice_cols(c0, c1);
    n.op = Op::slice_cols;
    n.p0 = a;
    n.aux0 = c0;
    n.aux1 = c1;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::sum_all(NodeId a) {
    const Mat& av = value(a);
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i];
    Node n;
    n.value = Mat::full(1, 1, s);
    n.op = Op::sum_all;
    n.p0 = a;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::add_rowvec(NodeId a, NodeId row) {
    const Mat& av = value(a);
    const Mat& rv = value(row);
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw DimError("add_rowvec: " + av.shape_str() + " vs row " + rv.shape_str());
    }
    Node n;
    n.value = Mat(av.rows(), av.cols());
    for (std::size_t r = 0; r < av.rows(); ++r)
        K().add(av.row(r), rv.data(), n.value.row(r), av.cols());
    n.op = Op::add_rowvec;
    n.p0 = a;
    n.p1 = row;
    n.requires_grad = nodes_[a.idx].requires_grad || nodes_[row.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::scale_const(NodeId a, double s) {
    const Mat& av = value(a);
    Node n;
    n.value = Mat(av.rows(), av.cols());
    K().scale(s, av.data(), n.value.data(), av.size());
    n.op = Op::scale_const;
    n.p0 = a;
    n.scalar = s;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

NodeId Graph::add_const(NodeId a, double c) {
    const Mat& av = value(a);
    Node n;
    n.value = Mat(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) n.value[i] = av[i] + c;
    n.op = Op::add_const;
    n.p0 = a;
    n.scalar = c;
    n.requires_grad = nodes_[a.idx].requires_grad;
    return push(std::move(n));
}

namespace {
void ensure_grad(Mat& grad, const Mat& value) {
    if (grad.empty() && !value.empty()) grad = Mat(value.rows(), value.cols());
}
}  // namespace

void Graph::backprop_into(const Node& n) {
    Node* a = n.p0.valid() ? &nodes_[n.p0.idx] : nullptr;
    Node* b = n.p1.valid() ? &nodes_[n.p1.idx] : nullptr;
    const Mat& g = n.grad;

    // Grads are accumulated parent p0 first, then p1, always through the
    // same kernel path, so the accumulation order is stable.
    switch (n.op) {
        case Op::leaf:
            break;
        case Op::matmul: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                Mat bt = b->value.transposed();
                K().gemm_nn(g.data(), bt.data(), a->grad.data(), g.rows(), g.cols(),
                            bt.cols());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                K().gemm_tn(a->value.data(), g.data(), b->grad.data(),
                            a->value.cols(), a->value.rows(), g.cols());
            }
            break;
        }
        case Op::transpose: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                Mat gt = g.transposed();
                K().axpy(1.0, gt.data(), a->grad.data(), gt.size());
            }
            break;
        }
        case Op::add: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(1.0, g.data(), a->grad.data(), g.size());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                K().axpy(1.0, g.data(), b->grad.data(), g.size());
            }
            break;
        }
        case Op::sub: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(1.0, g.data(), a->grad.data(), g.size());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                K().axpy(-1.0, g.data(), b->grad.data(), g.size());
            }
            break;
        }
        case Op::hadamard: {
            Mat tmp(g.rows(), g.cols());
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().mul(g.data(), b->value.data(), tmp.data(), g.size());
                K().axpy(1.0, tmp.data(), a->grad.data(), g.size());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                K().mul(g.data(), a->value.data(), tmp.data(), g.size());
                K().axpy(1.0, tmp.data(), b->grad.data(), g.size());
            }
            break;
        }
        case Op::div: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                for (std::size_t i = 0; i < g.size(); ++i)
                    a->grad[i] += g[i] / b->value[i];
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                for (std::size_t i = 0; i < g.size(); ++i)
                    b->grad[i] -= g[i] * a->value[i] / (b->value[i] * b->value[i]);
            }
            break;
        }
        case Op::tanh_: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().tanh_bwd(n.value.data(), g.data(), a->grad.data(), g.size());
            }
            break;
        }
        case Op::relu_: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().relu_bwd(a->value.data(), g.data(), a->grad.data(), g.size());
            }
            break;
        }
        case Op::concat_cols: {
            const std::size_t seam = n.aux0;
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    K().axpy(1.0, g.row(r), a->grad.row(r), seam);
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    K().axpy(1.0, g.row(r) + seam, b->grad.row(r), g.cols() - seam);
            }
            break;
        }
        case Op::concat_rows: {
            const std::size_t seam = n.aux0;
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(1.0, g.data(), a->grad.data(), seam * g.cols());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                K().axpy(1.0, g.data() + seam * g.cols(), b->grad.data(),
                         (g.rows() - seam) * g.cols());
            }
            break;
        }
        case Op::slice_cols: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    K().axpy(1.0, g.row(r), a->grad.row(r) + n.aux0, g.cols());
            }
            break;
        }
        case Op::sum_all: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                const double gv = g[0];
                for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += gv;
            }
            break;
        }
        case Op::add_rowvec: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(1.0, g.data(), a->grad.data(), g.size());
            }
            if (b->requires_grad) {
                ensure_grad(b->grad, b->value);
                for (std::size_t r = 0; r < g.rows(); ++r)
                    K().axpy(1.0, g.row(r), b->grad.data(), g.cols());
            }
            break;
        }
        case Op::scale_const: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(n.scalar, g.data(), a->grad.data(), g.size());
            }
            break;
        }
        case Op::add_const: {
            if (a->requires_grad) {
                ensure_grad(a->grad, a->value);
                K().axpy(1.0, g.data(), a->grad.data(), g.size());
            }
            break;
        }
    }
}

void Graph::backward(NodeId loss) {
    if (backward_done_) {
        throw std::logic_error("Graph::backward called twice on one graph");
    }
    const Mat& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw DimError("backward: loss must be 1x1, got " + lv.shape_str());
    }
    if (!std::isfinite(lv[0])) {
        throw EvalError("backward: loss is not finite");
    }
    backward_done_ = true;

    std::vector<char> needed(nodes_.size(), 0);
    needed[loss.idx] = 1;
    nodes_[loss.idx].grad = Mat::full(1, 1, 1.0);

    for (std::size_t i = loss.idx + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!needed[i] || !n.requires_grad) continue;
        if (n.p0.valid()) needed[n.p0.idx] = 1;
        if (n.p1.valid()) needed[n.p1.idx] = 1;
        if (n.grad.empty()) continue;  // no gradient ever reached this node
        backprop_into(n);
    }
}

}  // namespace jca
