#pragma once

#include <functional>
#include <span>
#include <vector>

#include "swag/graph.hpp"

/// Minimal reverse-mode differentiation over dense double matrices.
///
/// Every tensor is a 2-D Eigen matrix (vectors are n x 1 or 1 x n, scalars are
/// 1 x 1). Values are computed eagerly when a primitive is recorded; backward()
/// replays the tape once in reverse. A tape is single-use: call backward() at
/// most once, then build a new tape for the next step.
namespace swag::ad {

/// Persistent trainable matrix. The gradient accumulates across backward passes
/// until zero_grad() is called.
struct Parameter {
    Parameter() = default;
    explicit Parameter(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

    Matrix value;
    Matrix grad;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid as long as its tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    double scalar() const;
    bool requires_grad() const;

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    using Backprop = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    /// Leaf whose gradient is readable through grad() after backward().
    Var variable(Matrix value);
    /// Leaf bound to `p`; backward() adds the leaf gradient into p.grad.
    Var param(Parameter& p);

    /// Propagates d(loss)/d(node) for every node. `loss` must be 1 x 1 and live
    /// on this tape; a tape can be differentiated only once.
    void backward(Var loss);

    /// Gradient of a node after backward(); all zeros if none reached it.
    Matrix grad(Var v) const;

    std::size_t size() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    // Low-level interface used by primitives.
    Var record(Matrix value, bool requires_grad, Backprop backprop);
    const Matrix& value_of(std::size_t id) const { return nodes_[id].value; }
    const Matrix& grad_of(std::size_t id) const { return nodes_[id].grad; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    template <typename Derived>
    void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
        Node& node = nodes_[id];
        if (!node.requires_grad) return;
        if (node.grad.size() == 0)
            node.grad = g;
        else
            node.grad += g;
    }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        Backprop backprop;
        Parameter* param = nullptr;
    };

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

// Primitives. Binary primitives require both operands on the same tape and
// throw ContractError naming the primitive on shape mismatch.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// a (n x k) plus a 1 x k row broadcast over every row.
Var add_row(Var a, Var row);
Var cwise_product(Var a, Var b);
Var scale(Var a, double s);
Var sigmoid(Var a);
Var relu(Var a);
Var transpose(Var a);
Var hconcat(std::span<const Var> parts);
Var vconcat(std::span<const Var> parts);
Var block_diag(std::span<const Var> blocks);
/// blockdiag(blocks) * x without forming the block-diagonal matrix; the blocks
/// are constants.
Var block_diag_matmul(std::vector<Matrix> blocks, Var x);
/// Row i of the result is the sum of the i-th run of `sizes[i]` consecutive rows.
Var segment_sum(Var x, std::vector<Index> sizes);
/// trace(a b) for a (n x m), b (m x n).
Var trace_of_product(Var a, Var b);
Var row_softmax(Var a);
Var row_log_softmax(Var a);
Var log(Var a);
Var sum(Var a);
Var mean(Var a);
/// Each row scaled to unit Euclidean norm; zero rows stay zero.
Var l2_normalize(Var a);
/// Forwards the value; nothing upstream receives gradient through it.
Var stop_gradient(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return matmul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

/// Numerically stable logistic function, shared with value-level code.
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace swag::ad
