#pragma once

#include <vector>

#include "swag/autodiff.hpp"
#include "swag/random.hpp"

namespace swag {

/// Two-layer perceptron: in -> hidden (ReLU) -> out. Weights start at
/// U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
class Mlp {
public:
    Mlp() = default;
    Mlp(Index in, Index hidden, Index out, Rng& rng);

    ad::Var forward(ad::Tape& tape, ad::Var x, bool trainable = true);
    Matrix forward(const Matrix& x) const;

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;

    Index input_dim() const { return w1.value.rows(); }
    Index output_dim() const { return w2.value.cols(); }

    ad::Parameter w1, b1, w2, b2;
};

/// Projection head for the contrastive objective.
using ProjectionHead = Mlp;
/// Prediction head for the non-contrastive objective.
using PredictionHead = Mlp;
/// Downstream classifier on top of the encoder.
using Predictor = Mlp;

inline constexpr Index kHeadWidth = 32;

} // namespace swag
