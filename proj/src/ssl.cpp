#include "swag/ssl.hpp"

namespace swag {

std::string to_string(Objective o) { return o == Objective::InfoNce ? "infonce" : "simsiam"; }

Objective objective_from_string(const std::string& s) {
    if (s == "infonce") return Objective::InfoNce;
    if (s == "simsiam") return Objective::SimSiam;
    throw ConfigError("unknown objective '" + s + "' (expected infonce or simsiam)");
}

ad::Var infonce_from_similarities(ad::Var similarities) {
    const Index b = similarities.rows();
    if (similarities.cols() != b) throw ContractError("infonce: similarity matrix must be square");
    if (b < 2) throw ContractError("infonce: batch size must be at least 2 (no negatives)");
    ad::Tape& tape = *similarities.tape();
    const ad::Var log_prob = ad::row_log_softmax(similarities);
    const ad::Var picked = ad::cwise_product(log_prob, tape.constant(Matrix::Identity(b, b)));
    return ad::scale(ad::sum(picked), -1.0 / static_cast<double>(b));
}

ad::Var infonce_loss(const SslBatch& batch, ProjectionHead& head) {
    if (batch.anchors.rows() != batch.positives.rows()) throw ContractError("infonce: anchor/positive count mismatch");
    ad::Tape& tape = *batch.anchors.tape();
    const ad::Var za = head.forward(tape, batch.anchors);
    const ad::Var zp = head.forward(tape, batch.positives);
    return infonce_from_similarities(ad::matmul(za, ad::transpose(zp)));
}

ad::Var negative_cosine(ad::Var anchors, ad::Var positives) {
    if (anchors.rows() < 1) throw ContractError("noncontrastive: empty batch");
    if (anchors.rows() != positives.rows() || anchors.cols() != positives.cols())
        throw ContractError("noncontrastive: anchor/positive shape mismatch");
    const ad::Var a = ad::l2_normalize(anchors);
    const ad::Var p = ad::stop_gradient(ad::l2_normalize(positives));
    return ad::scale(ad::sum(ad::cwise_product(a, p)), -1.0 / static_cast<double>(anchors.rows()));
}

ad::Var noncontrastive_loss(const SslBatch& batch, PredictionHead& head) {
    ad::Tape& tape = *batch.anchors.tape();
    return negative_cosine(head.forward(tape, batch.anchors), head.forward(tape, batch.positives));
}

ad::Var literal_infonce_objective(ad::Var similarities) {
    const Index b = similarities.rows();
    ad::Tape& tape = *similarities.tape();
    const ad::Var prob = ad::row_softmax(similarities);
    return ad::scale(ad::sum(ad::cwise_product(prob, tape.constant(Matrix::Identity(b, b)))), 1.0 / static_cast<double>(b));
}

ad::Var literal_infonce_loss(const SslBatch& batch, ProjectionHead& head) {
    if (batch.anchors.rows() != batch.positives.rows()) throw ContractError("infonce: anchor/positive count mismatch");
    ad::Tape& tape = *batch.anchors.tape();
    const ad::Var za = head.forward(tape, batch.anchors);
    const ad::Var zp = head.forward(tape, batch.positives);
    return literal_infonce_objective(ad::matmul(za, ad::transpose(zp)));
}

ad::Var literal_noncontrastive_objective(const SslBatch& batch, PredictionHead& head) {
    ad::Tape& tape = *batch.anchors.tape();
    const ad::Var a = head.forward(tape, batch.anchors);
    const ad::Var p = ad::stop_gradient(head.forward(tape, batch.positives));
    return ad::scale(ad::sum(ad::cwise_product(a, p)), 1.0 / static_cast<double>(batch.anchors.rows()));
}

SslBatch make_ssl_batch(SwagTapeEncoder& encoder, std::span<const Graph> graphs,
                        std::span<const PreparedGraph> prepared, std::span<const std::size_t> indices,
                        const Augmenter& augmenter, std::uint64_t epoch, const KernelConfig& cfg) {
    if (graphs.size() != prepared.size()) throw ContractError("make_ssl_batch: graphs/prepared size mismatch");
    std::vector<const PreparedGraph*> anchors;
    std::vector<PreparedGraph> views;
    views.reserve(indices.size());
    for (std::size_t idx : indices) {
        anchors.push_back(&prepared[idx]);
        views.push_back(prepare(augmenter.augment(graphs[idx], idx, epoch), cfg));
    }
    std::vector<const PreparedGraph*> positives;
    for (const auto& v : views) positives.push_back(&v);
    return {encoder.encode(anchors), encoder.encode(positives)};
}

} // namespace swag
