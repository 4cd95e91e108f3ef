#include "swag/autodiff.hpp"

#include <cmath>
#include <sstream>

namespace swag::ad {

namespace {

std::string shape(const Matrix& m) {
    std::ostringstream s;
    s << m.rows() << "x" << m.cols();
    return s.str();
}

Tape& same_tape(const char* op, Var a, Var b) {
    if (a.tape() == nullptr || a.tape() != b.tape())
        throw ContractError(std::string(op) + ": operands live on different tapes");
    return *a.tape();
}

Tape& tape_of(const char* op, Var a) {
    if (a.tape() == nullptr) throw ContractError(std::string(op) + ": operand is not on a tape");
    return *a.tape();
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
    throw ContractError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

Tape& tape_of_all(const char* op, std::span<const Var> parts) {
    if (parts.empty()) throw ContractError(std::string(op) + ": no operands");
    Tape& t = tape_of(op, parts.front());
    for (const Var& v : parts)
        if (v.tape() != &t) throw ContractError(std::string(op) + ": operands live on different tapes");
    return t;
}

bool any_requires_grad(std::span<const Var> parts) {
    for (const Var& v : parts)
        if (v.requires_grad()) return true;
    return false;
}

} // namespace

const Matrix& Var::value() const {
    if (tape_ == nullptr) throw ContractError("Var: not attached to a tape");
    return tape_->value_of(id_);
}

double Var::scalar() const {
    const Matrix& v = value();
    if (v.size() != 1) throw ContractError("Var::scalar: value is " + shape(v));
    return v(0, 0);
}

bool Var::requires_grad() const { return tape_ != nullptr && tape_->requires_grad(id_); }

Var Tape::record(Matrix value, bool requires_grad, Backprop backprop) {
    if (consumed_) throw ContractError("tape: cannot record after backward()");
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, requires_grad ? std::move(backprop) : Backprop{}, nullptr});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, {}); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, {}); }

Var Tape::param(Parameter& p) {
    Var v = record(p.value, true, {});
    nodes_.back().param = &p;
    return v;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ContractError("backward: loss does not belong to this tape");
    if (consumed_) throw ContractError("backward: tape already consumed (stale tape)");
    if (nodes_[loss.id()].value.size() != 1)
        throw ContractError("backward: loss must be scalar, got " + shape(nodes_[loss.id()].value));
    consumed_ = true;
    if (!nodes_[loss.id()].requires_grad) return;
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (node.grad.size() == 0) continue;
        if (node.backprop) node.backprop(*this, i);
        if (node.param != nullptr) {
            if (node.param->grad.size() == 0)
                node.param->grad = node.grad;
            else
                node.param->grad += node.grad;
        }
    }
}

Matrix Tape::grad(Var v) const {
    const Node& node = nodes_.at(v.id());
    if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape("matmul", a, b);
    if (a.cols() != b.rows()) shape_error("matmul", a.value(), b.value());
    const std::size_t ia = a.id(), ib = b.id();
    return t.record(a.value() * b.value(), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad_of(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value_of(ib).transpose());
        if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value_of(ia).transpose() * g);
    });
}

Var add(Var a, Var b) {
    Tape& t = same_tape("add", a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a.value(), b.value());
    const std::size_t ia = a.id(), ib = b.id();
    return t.record(a.value() + b.value(), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad_of(self));
        tp.accumulate(ib, tp.grad_of(self));
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape("sub", a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("sub", a.value(), b.value());
    const std::size_t ia = a.id(), ib = b.id();
    return t.record(a.value() - b.value(), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad_of(self));
        tp.accumulate(ib, -tp.grad_of(self));
    });
}

Var add_row(Var a, Var row) {
    Tape& t = same_tape("add_row", a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a.value(), row.value());
    const std::size_t ia = a.id(), ir = row.id();
    Matrix out = a.value().rowwise() + row.value().row(0);
    return t.record(std::move(out), a.requires_grad() || row.requires_grad(), [ia, ir](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad_of(self));
        if (tp.requires_grad(ir)) tp.accumulate(ir, tp.grad_of(self).colwise().sum());
    });
}

Var cwise_product(Var a, Var b) {
    Tape& t = same_tape("cwise_product", a, b);
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("cwise_product", a.value(), b.value());
    const std::size_t ia = a.id(), ib = b.id();
    return t.record(a.value().cwiseProduct(b.value()), a.requires_grad() || b.requires_grad(),
                    [ia, ib](Tape& tp, std::size_t self) {
                        const Matrix& g = tp.grad_of(self);
                        if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value_of(ib)));
                        if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value_of(ia)));
                    });
}

Var scale(Var a, double s) {
    Tape& t = tape_of("scale", a);
    const std::size_t ia = a.id();
    return t.record(s * a.value(), a.requires_grad(), [ia, s](Tape& tp, std::size_t self) {
        tp.accumulate(ia, s * tp.grad_of(self));
    });
}

Var sigmoid(Var a) {
    Tape& t = tape_of("sigmoid", a);
    const std::size_t ia = a.id();
    Matrix y = a.value().unaryExpr([](double x) { return sigmoid(x); });
    return t.record(std::move(y), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& y = tp.value_of(self);
        tp.accumulate(ia, tp.grad_of(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
    });
}

Var relu(Var a) {
    Tape& t = tape_of("relu", a);
    const std::size_t ia = a.id();
    return t.record(a.value().cwiseMax(0.0), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& x = tp.value_of(ia);
        tp.accumulate(ia, (x.array() > 0.0).select(tp.grad_of(self).array(), 0.0).matrix());
    });
}

Var transpose(Var a) {
    Tape& t = tape_of("transpose", a);
    const std::size_t ia = a.id();
    return t.record(a.value().transpose(), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad_of(self).transpose());
    });
}

Var hconcat(std::span<const Var> parts) {
    Tape& t = tape_of_all("hconcat", parts);
    const Index rows = parts.front().rows();
    Index cols = 0;
    for (const Var& v : parts) {
        if (v.rows() != rows) shape_error("hconcat", parts.front().value(), v.value());
        cols += v.cols();
    }
    Matrix out(rows, cols);
    std::vector<std::pair<std::size_t, Index>> layout;
    Index offset = 0;
    for (const Var& v : parts) {
        out.middleCols(offset, v.cols()) = v.value();
        layout.emplace_back(v.id(), offset);
        offset += v.cols();
    }
    return t.record(std::move(out), any_requires_grad(parts), [layout](Tape& tp, std::size_t self) {
        for (const auto& [id, off] : layout)
            if (tp.requires_grad(id)) tp.accumulate(id, tp.grad_of(self).middleCols(off, tp.value_of(id).cols()));
    });
}

Var vconcat(std::span<const Var> parts) {
    Tape& t = tape_of_all("vconcat", parts);
    const Index cols = parts.front().cols();
    Index rows = 0;
    for (const Var& v : parts) {
        if (v.cols() != cols) shape_error("vconcat", parts.front().value(), v.value());
        rows += v.rows();
    }
    Matrix out(rows, cols);
    std::vector<std::pair<std::size_t, Index>> layout;
    Index offset = 0;
    for (const Var& v : parts) {
        out.middleRows(offset, v.rows()) = v.value();
        layout.emplace_back(v.id(), offset);
        offset += v.rows();
    }
    return t.record(std::move(out), any_requires_grad(parts), [layout](Tape& tp, std::size_t self) {
        for (const auto& [id, off] : layout)
            if (tp.requires_grad(id)) tp.accumulate(id, tp.grad_of(self).middleRows(off, tp.value_of(id).rows()));
    });
}

Var block_diag(std::span<const Var> blocks) {
    Tape& t = tape_of_all("block_diag", blocks);
    Index rows = 0, cols = 0;
    for (const Var& v : blocks) {
        rows += v.rows();
        cols += v.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    struct Slot {
        std::size_t id;
        Index row, col;
    };
    std::vector<Slot> layout;
    Index r = 0, c = 0;
    for (const Var& v : blocks) {
        out.block(r, c, v.rows(), v.cols()) = v.value();
        layout.push_back({v.id(), r, c});
        r += v.rows();
        c += v.cols();
    }
    return t.record(std::move(out), any_requires_grad(blocks), [layout](Tape& tp, std::size_t self) {
        for (const auto& s : layout) {
            if (!tp.requires_grad(s.id)) continue;
            const Matrix& v = tp.value_of(s.id);
            tp.accumulate(s.id, tp.grad_of(self).block(s.row, s.col, v.rows(), v.cols()));
        }
    });
}

Var block_diag_matmul(std::vector<Matrix> blocks, Var x) {
    Index rows = 0;
    for (const Matrix& b : blocks) {
        if (b.rows() != b.cols()) throw ContractError("block_diag_matmul: blocks must be square");
        rows += b.rows();
    }
    if (rows != x.rows()) shape_error("block_diag_matmul", Matrix(rows, rows), x.value());
    Matrix out(rows, x.cols());
    Index r = 0;
    for (const Matrix& b : blocks) {
        out.middleRows(r, b.rows()).noalias() = b * x.value().middleRows(r, b.rows());
        r += b.rows();
    }
    const std::size_t ix = x.id();
    return x.tape()->record(std::move(out), x.requires_grad(), [blocks = std::move(blocks), ix](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad_of(self);
        Matrix gx(g.rows(), g.cols());
        Index r = 0;
        for (const Matrix& b : blocks) {
            gx.middleRows(r, b.rows()).noalias() = b.transpose() * g.middleRows(r, b.rows());
            r += b.rows();
        }
        tp.accumulate(ix, gx);
    });
}

Var segment_sum(Var x, std::vector<Index> sizes) {
    Index rows = 0;
    for (Index n : sizes) {
        if (n < 0) throw ContractError("segment_sum: negative segment size");
        rows += n;
    }
    if (rows != x.rows()) throw ContractError("segment_sum: segment sizes do not cover the rows");
    Matrix out(static_cast<Index>(sizes.size()), x.cols());
    Index r = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        out.row(static_cast<Index>(i)) = x.value().middleRows(r, sizes[i]).colwise().sum();
        r += sizes[i];
    }
    const std::size_t ix = x.id();
    return x.tape()->record(std::move(out), x.requires_grad(), [sizes = std::move(sizes), ix](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad_of(self);
        Matrix gx(tp.value_of(ix).rows(), g.cols());
        Index r = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            gx.middleRows(r, sizes[i]).rowwise() = g.row(static_cast<Index>(i));
            r += sizes[i];
        }
        tp.accumulate(ix, gx);
    });
}

Var trace_of_product(Var a, Var b) {
    Tape& t = same_tape("trace_of_product", a, b);
    if (a.cols() != b.rows() || a.rows() != b.cols()) shape_error("trace_of_product", a.value(), b.value());
    const std::size_t ia = a.id(), ib = b.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().cwiseProduct(b.value().transpose()).sum();
    return t.record(std::move(out), a.requires_grad() || b.requires_grad(), [ia, ib](Tape& tp, std::size_t self) {
        const double g = tp.grad_of(self)(0, 0);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value_of(ib).transpose());
        if (tp.requires_grad(ib)) tp.accumulate(ib, g * tp.value_of(ia).transpose());
    });
}

Var row_softmax(Var a) {
    Tape& t = tape_of("row_softmax", a);
    const std::size_t ia = a.id();
    const Matrix& x = a.value();
    Matrix y = (x.colwise() - x.rowwise().maxCoeff()).array().exp().matrix();
    y = y.array().colwise() / y.rowwise().sum().array();
    return t.record(std::move(y), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& y = tp.value_of(self);
        const Matrix& g = tp.grad_of(self);
        const Vector inner = g.cwiseProduct(y).rowwise().sum();
        tp.accumulate(ia, y.cwiseProduct(g.colwise() - inner));
    });
}

Var row_log_softmax(Var a) {
    Tape& t = tape_of("row_log_softmax", a);
    const std::size_t ia = a.id();
    const Matrix& x = a.value();
    const Vector row_max = x.rowwise().maxCoeff();
    const Matrix shifted = x.colwise() - row_max;
    const Vector log_norm = shifted.array().exp().rowwise().sum().log();
    Matrix y = shifted.colwise() - log_norm;
    return t.record(std::move(y), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& g = tp.grad_of(self);
        const Matrix softmax = tp.value_of(self).array().exp();
        const Vector total = g.rowwise().sum();
        tp.accumulate(ia, g - softmax.cwiseProduct(total.replicate(1, g.cols())));
    });
}

Var log(Var a) {
    Tape& t = tape_of("log", a);
    const std::size_t ia = a.id();
    return t.record(a.value().array().log().matrix(), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        tp.accumulate(ia, tp.grad_of(self).cwiseQuotient(tp.value_of(ia)));
    });
}

Var sum(Var a) {
    Tape& t = tape_of("sum", a);
    const std::size_t ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().sum();
    return t.record(std::move(out), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& x = tp.value_of(ia);
        tp.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), tp.grad_of(self)(0, 0)));
    });
}

Var mean(Var a) {
    Tape& t = tape_of("mean", a);
    if (a.value().size() == 0) throw ContractError("mean: empty operand");
    const std::size_t ia = a.id();
    Matrix out(1, 1);
    out(0, 0) = a.value().mean();
    return t.record(std::move(out), a.requires_grad(), [ia](Tape& tp, std::size_t self) {
        const Matrix& x = tp.value_of(ia);
        tp.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), tp.grad_of(self)(0, 0) / static_cast<double>(x.size())));
    });
}

Var l2_normalize(Var a) {
    Tape& t = tape_of("l2_normalize", a);
    const std::size_t ia = a.id();
    const Matrix& x = a.value();
    const Vector norms = x.rowwise().norm();
    Matrix y = Matrix::Zero(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r)
        if (norms(r) > 0.0) y.row(r) = x.row(r) / norms(r);
    return t.record(std::move(y), a.requires_grad(), [ia, norms](Tape& tp, std::size_t self) {
        const Matrix& y = tp.value_of(self);
        const Matrix& g = tp.grad_of(self);
        Matrix dx = Matrix::Zero(y.rows(), y.cols());
        for (Index r = 0; r < y.rows(); ++r) {
            if (norms(r) == 0.0) continue;
            const double proj = g.row(r).dot(y.row(r));
            dx.row(r) = (g.row(r) - proj * y.row(r)) / norms(r);
        }
        tp.accumulate(ia, dx);
    });
}

Var stop_gradient(Var a) {
    Tape& t = tape_of("stop_gradient", a);
    return t.record(a.value(), false, {});
}

} // namespace swag::ad
