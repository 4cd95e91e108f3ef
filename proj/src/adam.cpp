#include "swag/adam.hpp"

#include <cmath>

namespace swag::ad {

Adam::Adam(std::vector<Parameter*> params, AdamOptions options) : params_(std::move(params)), options_(options) {
    for (Parameter* p : params_) {
        if (p == nullptr) throw ContractError("Adam: null parameter");
        first_moment_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        second_moment_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

void Adam::step() {
    ++step_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols())
            throw ContractError("Adam: gradient shape does not match parameter");
        first_moment_[i] = options_.beta1 * first_moment_[i] + (1.0 - options_.beta1) * p.grad;
        second_moment_[i] = options_.beta2 * second_moment_[i] + (1.0 - options_.beta2) * p.grad.cwiseAbs2();
        p.value.array() -= options_.lr * (first_moment_[i].array() / c1) /
                           ((second_moment_[i].array() / c2).sqrt() + options_.eps);
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

} // namespace swag::ad
