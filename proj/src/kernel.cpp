#include "swag/kernel.hpp"

#include <cmath>

namespace swag {

void KernelConfig::validate() const {
    if (num_hidden < 1) throw ConfigError("kernel: number of hidden graphs must be >= 1");
    if (max_walk < 1) throw ConfigError("kernel: max walk length must be >= 1");
    if (hidden_nodes < 2) throw ConfigError("kernel: hidden graphs need at least 2 nodes");
    if (hidden_dim < 1) throw ConfigError("kernel: hidden feature dimension must be >= 1");
    diffusion.validate();
}

SwagParams SwagParams::init(const KernelConfig& cfg, Index input_dim, Rng& rng) {
    cfg.validate();
    if (input_dim < 1) throw ConfigError("kernel: input feature dimension must be >= 1");
    const Index m = cfg.hidden_nodes;
    const Index dh = cfg.hidden_dim;
    std::normal_distribution<double> raw_dist(0.0, 1.0);
    std::normal_distribution<double> feat_dist(0.0, 1.0 / std::sqrt(static_cast<double>(dh)));
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    std::uniform_real_distribution<double> map_dist(-bound, bound);

    SwagParams params;
    for (int k = 0; k < cfg.num_hidden; ++k) {
        Matrix raw(m, m), feats(m, dh);
        for (Index i = 0; i < raw.size(); ++i) raw(i) = raw_dist(rng);
        for (Index i = 0; i < feats.size(); ++i) feats(i) = feat_dist(rng);
        params.hidden_graphs.push_back({ad::Parameter(std::move(raw)), ad::Parameter(std::move(feats))});
    }
    Matrix w(input_dim, dh);
    for (Index i = 0; i < w.size(); ++i) w(i) = map_dist(rng);
    params.feature_map = {ad::Parameter(std::move(w)), ad::Parameter(Matrix::Zero(1, dh))};
    return params;
}

std::vector<ad::Parameter*> SwagParams::parameters() {
    std::vector<ad::Parameter*> out;
    for (auto& h : hidden_graphs) {
        out.push_back(&h.raw_weights);
        out.push_back(&h.hidden_features);
    }
    out.push_back(&feature_map.weight);
    out.push_back(&feature_map.bias);
    return out;
}

std::vector<const ad::Parameter*> SwagParams::parameters() const {
    std::vector<const ad::Parameter*> out;
    for (const auto& h : hidden_graphs) {
        out.push_back(&h.raw_weights);
        out.push_back(&h.hidden_features);
    }
    out.push_back(&feature_map.weight);
    out.push_back(&feature_map.bias);
    return out;
}

void SwagParams::check(const KernelConfig& cfg, Index input_dim) const {
    if (static_cast<int>(hidden_graphs.size()) != cfg.num_hidden)
        throw ContractError("swag params: hidden graph count does not match config");
    for (const auto& h : hidden_graphs) {
        if (h.raw_weights.value.rows() != cfg.hidden_nodes || h.raw_weights.value.cols() != cfg.hidden_nodes ||
            h.hidden_features.value.rows() != cfg.hidden_nodes || h.hidden_features.value.cols() != cfg.hidden_dim)
            throw ContractError("swag params: hidden graph shape does not match config");
    }
    if (feature_map.weight.value.rows() != input_dim || feature_map.weight.value.cols() != cfg.hidden_dim ||
        feature_map.bias.value.rows() != 1 || feature_map.bias.value.cols() != cfg.hidden_dim)
        throw ContractError("swag params: feature map shape does not match input/hidden dimensions");
}

ad::Var hidden_adjacency(ad::Var raw) {
    ad::Tape& tape = *raw.tape();
    const Index m = raw.rows();
    const ad::Var sym = ad::scale(ad::add(raw, ad::transpose(raw)), 0.5);
    const ad::Var off_diagonal = tape.constant(Matrix::Ones(m, m) - Matrix::Identity(m, m));
    return ad::cwise_product(ad::sigmoid(sym), off_diagonal);
}

double exact_rw_kernel(const Graph& g, const Graph& g2, int p) {
    if (g.feature_dim() != g2.feature_dim()) throw ContractError("exact_rw_kernel: feature dimension mismatch");
    if (p < 1) throw ContractError("exact_rw_kernel: walk length must be >= 1");
    Matrix ap = g.adjacency, ap2 = g2.adjacency;
    for (int i = 1; i < p; ++i) {
        ap = ap * g.adjacency;
        ap2 = ap2 * g2.adjacency;
    }
    const Matrix sim = g.features * g2.features.transpose();  // <x_i, x'_k>
    double total = 0.0;
    for (Index k = 0; k < g2.num_nodes(); ++k)
        for (Index l = 0; l < g2.num_nodes(); ++l)
            for (Index i = 0; i < g.num_nodes(); ++i)
                for (Index j = 0; j < g.num_nodes(); ++j) total += sim(i, k) * ap(i, j) * ap2(k, l) * sim(j, l);
    return total;
}

PreparedGraph prepare(const Graph& g, const KernelConfig& cfg) {
    PreparedGraph out;
    out.features = g.features;
    const Matrix b = diffuse(g.adjacency, cfg.diffusion);
    Matrix power = b;
    for (int p = 1; p <= cfg.max_walk; ++p) {
        out.diffusion_powers.push_back(power);
        if (p < cfg.max_walk) power = power * b;
    }
    return out;
}

std::vector<PreparedGraph> prepare(std::span<const Graph> graphs, const KernelConfig& cfg) {
    std::vector<PreparedGraph> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(prepare(g, cfg));
    return out;
}

RowVector swag_encode(const PreparedGraph& g, const SwagParams& params, const KernelConfig& cfg) {
    params.check(cfg, g.features.cols());
    const int P = cfg.max_walk;
    const Matrix xm = params.feature_map.apply(g.features);
    RowVector out(cfg.output_dim());
    for (int k = 0; k < cfg.num_hidden; ++k) {
        const HiddenGraph& h = params.hidden_graphs[k];
        const Matrix adj = hidden_adjacency(h);
        const Matrix s = xm * h.hidden_features.value.transpose();
        Matrix right = s;
        for (int p = 1; p <= P; ++p) {
            right = right * adj;
            out(k * P + p - 1) = (g.diffusion_powers[p - 1] * s).cwiseProduct(right).sum();
        }
    }
    return out;
}

RowVector swag_encode(const Graph& g, const SwagParams& params, const KernelConfig& cfg) {
    return swag_encode(prepare(g, cfg), params, cfg);
}

Matrix swag_encode(std::span<const PreparedGraph> graphs, const SwagParams& params, const KernelConfig& cfg) {
    Matrix out(static_cast<Index>(graphs.size()), cfg.output_dim());
    for (std::size_t i = 0; i < graphs.size(); ++i) out.row(static_cast<Index>(i)) = swag_encode(graphs[i], params, cfg);
    return out;
}

SwagTapeEncoder::SwagTapeEncoder(ad::Tape& tape, SwagParams& params, const KernelConfig& cfg, bool trainable)
    : tape_(tape), cfg_(cfg) {
    cfg.validate();
    auto bind = [&](ad::Parameter& p) { return trainable ? tape.param(p) : tape.constant(p.value); };
    weight_ = bind(params.feature_map.weight);
    bias_ = bind(params.feature_map.bias);

    const int M = cfg.num_hidden, P = cfg.max_walk;
    const Index m = cfg.hidden_nodes;
    for (auto& h : params.hidden_graphs) {
        hidden_features_t_.push_back(ad::transpose(bind(h.hidden_features)));
        const ad::Var adj = hidden_adjacency(bind(h.raw_weights));
        std::vector<ad::Var> powers{adj};
        for (int p = 2; p <= P; ++p) powers.push_back(ad::matmul(powers.back(), adj));
        hidden_powers_.push_back(std::move(powers));
    }
    for (int p = 1; p <= P; ++p) {
        Matrix select = Matrix::Zero(M * m, M * P);
        for (int k = 0; k < M; ++k) select.block(k * m, k * P + p - 1, m, 1).setOnes();
        grouping_.push_back(tape.constant(std::move(select)));
    }
}

ad::Var SwagTapeEncoder::encode(const PreparedGraph& g) {
    const PreparedGraph* one[] = {&g};
    return encode(one);
}

ad::Var SwagTapeEncoder::encode(std::span<const PreparedGraph* const> graphs) {
    if (graphs.empty()) throw ContractError("swag encode: empty batch");
    Index total = 0;
    for (const PreparedGraph* g : graphs) {
        if (g->features.cols() != weight_.rows()) throw ContractError("swag encode: feature dimension mismatch");
        if (static_cast<int>(g->diffusion_powers.size()) < cfg_.max_walk)
            throw ContractError("swag encode: graph prepared with fewer diffusion powers than max_walk");
        total += g->features.rows();
    }
    Matrix features(total, weight_.rows());
    std::vector<Index> sizes;
    Index offset = 0;
    for (const PreparedGraph* g : graphs) {
        features.middleRows(offset, g->features.rows()) = g->features;
        sizes.push_back(g->features.rows());
        offset += g->features.rows();
    }

    const ad::Var xm = ad::add_row(ad::matmul(tape_.constant(std::move(features)), weight_), bias_);
    std::vector<ad::Var> s_parts;  // per hidden graph, total x m
    for (const ad::Var& h : hidden_features_t_) s_parts.push_back(ad::matmul(xm, h));
    const ad::Var s = ad::hconcat(s_parts);

    ad::Var out;
    for (int p = 1; p <= cfg_.max_walk; ++p) {
        std::vector<Matrix> diffusion;
        for (const PreparedGraph* g : graphs) diffusion.push_back(g->diffusion_powers[p - 1]);
        const ad::Var left = ad::block_diag_matmul(std::move(diffusion), s);
        std::vector<ad::Var> right_parts;
        for (std::size_t k = 0; k < s_parts.size(); ++k)
            right_parts.push_back(ad::matmul(s_parts[k], hidden_powers_[k][p - 1]));
        const ad::Var per_node = ad::cwise_product(left, ad::hconcat(right_parts));
        const ad::Var term = ad::matmul(ad::segment_sum(per_node, sizes), grouping_[p - 1]);
        out = p == 1 ? term : ad::add(out, term);
    }
    return out;
}

} // namespace swag
