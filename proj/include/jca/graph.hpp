#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jca/mat.hpp"

namespace jca {

// Handle into a Graph's node arena.
struct NodeId {
    std::size_t idx = static_cast<std::size_t>(-1);
    bool valid() const { return idx != static_cast<std::size_t>(-1); }
};

enum class Op : std::uint8_t {
    leaf,
    matmul,
    transpose,
    add,
    sub,
    hadamard,
    div,
    tanh_,
    relu_,
    concat_cols,
    concat_rows,
    slice_cols,
    sum_all,
    add_rowvec,
    scale_const,
    add_const,
};

// Reverse-mode tape over dense matrices. Values are computed eagerly when a
// node is created; backward() runs one reverse sweep over the tape, which is
// already in topological order. Gradients accumulate into parents in a fixed
// order, so a given graph always produces bit-identical gradients.
//
// A graph is single-owner and built once per evaluation (define-by-run); call
// backward() at most once.
class Graph {
public:
    NodeId leaf(Mat value, bool requires_grad = false);

    // c = a * b; dL/da += dL/dc * b^T, dL/db += a^T * dL/dc
    NodeId matmul(NodeId a, NodeId b);

    NodeId transpose(NodeId a);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);

    // Entrywise product (same shape).
    NodeId hadamard(NodeId a, NodeId b);

    // Entrywise quotient (same shape). Caller guarantees nonzero denominator.
    NodeId div(NodeId a, NodeId b);

    NodeId tanh(NodeId a);

    // Subgradient at exactly 0 is 0.
    NodeId relu(NodeId a);

    // Side-by-side concatenation; backward splits the gradient at the seam.
    NodeId concat_cols(NodeId a, NodeId b);

    // Stacked concatenation (shared column count).
    NodeId concat_rows(NodeId a, NodeId b);

    // Columns [c0, c1).
    NodeId slice_cols(NodeId a, std::size_t c0, std::size_t c1);

    // 1x1 sum of all entries.
    NodeId sum_all(NodeId a);

    // a (r x c) plus a row vector (1 x c) broadcast over the rows.
    NodeId add_rowvec(NodeId a, NodeId row);

    NodeId scale_const(NodeId a, double s);
    NodeId add_const(NodeId a, double c);

    const Mat& value(NodeId id) const { return nodes_[id.idx].value; }
    const Mat& grad(NodeId id) const { return nodes_[id.idx].grad; }

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. `loss` must
    // be 1x1 and finite.
    void backward(NodeId loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        Op op = Op::leaf;
        NodeId p0, p1;
        double scalar = 0.0;     // scale_const / add_const
        std::size_t aux0 = 0;    // slice start / concat seam
        std::size_t aux1 = 0;    // slice end
        bool requires_grad = false;
    };

    NodeId push(Node n);
    void backprop_into(const Node& n);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace jca
