#include "swag/mlp.hpp"

#include <cmath>

namespace swag {

namespace {

ad::Parameter uniform(Index rows, Index cols, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m(i) = dist(rng);
    return ad::Parameter(std::move(m));
}

} // namespace

Mlp::Mlp(Index in, Index hidden, Index out, Rng& rng) {
    if (in < 1 || hidden < 1 || out < 1) throw ConfigError("mlp: layer widths must be positive");
    const double b_in = 1.0 / std::sqrt(static_cast<double>(in));
    const double b_hidden = 1.0 / std::sqrt(static_cast<double>(hidden));
    w1 = uniform(in, hidden, b_in, rng);
    b1 = uniform(1, hidden, b_in, rng);
    w2 = uniform(hidden, out, b_hidden, rng);
    b2 = uniform(1, out, b_hidden, rng);
}

ad::Var Mlp::forward(ad::Tape& tape, ad::Var x, bool trainable) {
    auto bind = [&](ad::Parameter& p) { return trainable ? tape.param(p) : tape.constant(p.value); };
    const ad::Var h = ad::relu(ad::add_row(ad::matmul(x, bind(w1)), bind(b1)));
    return ad::add_row(ad::matmul(h, bind(w2)), bind(b2));
}

Matrix Mlp::forward(const Matrix& x) const {
    if (x.cols() != w1.value.rows()) throw ContractError("mlp: input width mismatch");
    const Matrix h = ((x * w1.value).rowwise() + b1.value.row(0)).cwiseMax(0.0);
    return (h * w2.value).rowwise() + b2.value.row(0);
}

std::vector<ad::Parameter*> Mlp::parameters() { return {&w1, &b1, &w2, &b2}; }

std::vector<const ad::Parameter*> Mlp::parameters() const { return {&w1, &b1, &w2, &b2}; }

} // namespace swag
