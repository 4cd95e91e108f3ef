#pragma once

#include <vector>

#include "swag/autodiff.hpp"

namespace swag::ad {

struct AdamOptions {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Holds first/second moments per parameter.
class Adam {
public:
    explicit Adam(std::vector<Parameter*> params, AdamOptions options = {});

    /// One update from the gradients currently stored in the parameters.
    void step();
    void zero_grad();

    long steps() const { return step_; }
    const AdamOptions& options() const { return options_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Matrix> first_moment_;
    std::vector<Matrix> second_moment_;
    AdamOptions options_;
    long step_ = 0;
};

} // namespace swag::ad
