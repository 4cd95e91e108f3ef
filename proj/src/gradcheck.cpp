#include "swag/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace swag::ad {

namespace {

double evaluate(const LossBuilder& loss) {
    Tape tape;
    return loss(tape).scalar();
}

} // namespace

GradCheckResult finite_diff_check(const LossBuilder& loss, const std::vector<Parameter*>& params, double step,
                                  double floor) {
    for (Parameter* p : params) p->zero_grad();
    {
        Tape tape;
        tape.backward(loss(tape));
    }
    std::vector<Matrix> analytic;
    for (Parameter* p : params) analytic.push_back(p->grad);

    GradCheckResult result;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        for (Index i = 0; i < p.value.size(); ++i) {
            const double original = p.value(i);
            auto at = [&](double offset) {
                p.value(i) = original + offset;
                return evaluate(loss);
            };
            const double numeric =
                (at(-2.0 * step) - 8.0 * at(-step) + 8.0 * at(step) - at(2.0 * step)) / (12.0 * step);
            p.value(i) = original;
            const double exact = analytic[k](i);
            const double denom = std::max({std::abs(exact), std::abs(numeric), floor});
            const double err = std::abs(exact - numeric) / denom;
            ++result.coordinates;
            if (err > result.max_relative_error || std::isnan(err)) {
                result.max_relative_error = std::isnan(err) ? INFINITY : err;
                result.worst_parameter = k;
                result.worst_entry = i;
            }
        }
    }
    for (Parameter* p : params) p->zero_grad();
    return result;
}

} // namespace swag::ad
