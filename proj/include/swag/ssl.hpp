#pragma once

#include <span>
#include <string>

#include "swag/kernel.hpp"
#include "swag/lga.hpp"
#include "swag/mlp.hpp"

namespace swag {

enum class Objective { InfoNce, SimSiam };

std::string to_string(Objective o);
Objective objective_from_string(const std::string& s);

/// Anchor and positive encodings; row i of `positives` is the view of row i
/// of `anchors`.
struct SslBatch {
    ad::Var anchors;
    ad::Var positives;
};

/// Contrastive loss from a B x B similarity matrix whose diagonal holds the
/// positive pairs and whose off-diagonal entries in each row are the in-batch
/// negatives: mean over rows of -log softmax(row)[i]. The softmax subtracts the
/// row maximum first.
ad::Var infonce_from_similarities(ad::Var similarities);

/// s(x, y) = <phi(x), phi(y)>, negatives are the other positives in the batch.
ad::Var infonce_loss(const SslBatch& batch, ProjectionHead& head);

/// Mean over pairs of -cos(a_i, sg(p_i)). A zero row has cosine 0.
ad::Var negative_cosine(ad::Var anchors, ad::Var positives);

/// Mean -cos(psi(h(G)), sg(psi(h(G+)))) with psi applied to both branches.
ad::Var noncontrastive_loss(const SslBatch& batch, PredictionHead& head);

/// Uncorrected objectives, for comparison only: the mean positive softmax
/// probability (no log, no sign flip) and the mean raw inner product against
/// the stopped branch. Minimizing either pushes positives apart.
ad::Var literal_infonce_objective(ad::Var similarities);
ad::Var literal_infonce_loss(const SslBatch& batch, ProjectionHead& head);
ad::Var literal_noncontrastive_objective(const SslBatch& batch, PredictionHead& head);

/// Encodes each indexed graph and a fresh augmentation of it with the same
/// encoder. `prepared[i]` must be prepare(graphs[i]).
SslBatch make_ssl_batch(SwagTapeEncoder& encoder, std::span<const Graph> graphs,
                        std::span<const PreparedGraph> prepared, std::span<const std::size_t> indices,
                        const Augmenter& augmenter, std::uint64_t epoch, const KernelConfig& cfg);

} // namespace swag
