#include "swag/lga.hpp"

#include "swag/random.hpp"

namespace swag {

Matrix sample_augmentation(const Matrix& theta, std::uint64_t seed) {
    const Index m = theta.rows();
    if (theta.cols() != m) throw ContractError("sample_augmentation: theta must be square");
    for (Index u = 0; u < m; ++u)
        for (Index v = 0; v < m; ++v) {
            const double t = theta(u, v);
            if (!(t >= 0.0 && t <= 1.0)) throw ContractError("sample_augmentation: probability outside [0, 1]");
            if (std::abs(t - theta(v, u)) > 1e-12) throw ContractError("sample_augmentation: theta must be symmetric");
        }
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix out = Matrix::Zero(m, m);
    for (Index u = 0; u < m; ++u)
        for (Index v = u + 1; v < m; ++v)
            if (unit(rng) < theta(u, v)) out(u, v) = out(v, u) = 1.0;
    return out;
}

Matrix sbm_probabilities(const std::vector<Index>& block_sizes, double intra, double inter) {
    if (!(intra >= 0.0 && intra <= 1.0 && inter >= 0.0 && inter <= 1.0))
        throw ConfigError("sbm: probabilities must lie in [0, 1]");
    std::vector<Index> block;
    for (std::size_t b = 0; b < block_sizes.size(); ++b)
        for (Index i = 0; i < block_sizes[b]; ++i) block.push_back(static_cast<Index>(b));
    const Index m = static_cast<Index>(block.size());
    Matrix theta(m, m);
    for (Index u = 0; u < m; ++u)
        for (Index v = 0; v < m; ++v) theta(u, v) = block[u] == block[v] ? intra : inter;
    return theta;
}

Graph generate_sbm(const std::vector<Index>& block_sizes, double intra, double inter, std::uint64_t seed) {
    return graph_from_adjacency(sample_augmentation(sbm_probabilities(block_sizes, intra, inter), seed));
}

Graph edge_drop_baseline(const Graph& g, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("edge_drop: rate must lie in [0, 1]");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Graph out = g;
    const Index n = g.num_nodes();
    for (Index u = 0; u < n; ++u)
        for (Index v = u + 1; v < n; ++v)
            if (g.adjacency(u, v) != 0.0 && unit(rng) < rate) out.adjacency(u, v) = out.adjacency(v, u) = 0.0;
    return out;
}

std::string to_string(AugmenterKind kind) {
    switch (kind) {
    case AugmenterKind::Lga: return "lga";
    case AugmenterKind::EdgeDrop: return "edge-drop";
    case AugmenterKind::Identity: return "identity";
    }
    return "unknown";
}

AugmenterKind augmenter_from_string(const std::string& s) {
    if (s == "lga") return AugmenterKind::Lga;
    if (s == "edge-drop") return AugmenterKind::EdgeDrop;
    if (s == "identity") return AugmenterKind::Identity;
    throw ConfigError("unknown augmenter '" + s + "' (expected lga, edge-drop or identity)");
}

void AugmenterConfig::validate() const {
    if (kind == AugmenterKind::Lga && !(tau > 0.0)) throw ConfigError("augmenter: tau must be positive");
    if (kind == AugmenterKind::EdgeDrop && !(drop_rate >= 0.0 && drop_rate <= 1.0))
        throw ConfigError("augmenter: drop rate must lie in [0, 1]");
}

EdgeDropAugmenter::EdgeDropAugmenter(double rate, std::uint64_t seed) : rate_(rate), seed_(seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("edge_drop: rate must lie in [0, 1]");
}

Graph EdgeDropAugmenter::augment(const Graph& g, std::size_t graph_index, std::uint64_t epoch) const {
    return edge_drop_baseline(g, rate_, derive_seed(seed_, {graph_index, epoch}));
}

LgaAugmenter::LgaAugmenter(double tau, std::uint64_t seed) : tau_(tau), seed_(seed) {
    if (!(tau > 0.0)) throw ConfigError("lga: tau must be positive");
}

const UsvtEstimate<double>& LgaAugmenter::estimate(const Graph& g, std::size_t graph_index) const {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(graph_index);
    if (it == cache_.end()) it = cache_.emplace(graph_index, usvt(g.adjacency, tau_)).first;
    return it->second;
}

Graph LgaAugmenter::augment(const Graph& g, std::size_t graph_index, std::uint64_t epoch) const {
    const auto& est = estimate(g, graph_index);
    Graph out;
    out.adjacency = sample_augmentation(est.theta, derive_seed(seed_, {graph_index, epoch}));
    out.features = g.features;
    out.label = g.label;
    return out;
}

std::unique_ptr<Augmenter> make_augmenter(const AugmenterConfig& cfg) {
    cfg.validate();
    switch (cfg.kind) {
    case AugmenterKind::Lga: return std::make_unique<LgaAugmenter>(cfg.tau, cfg.seed);
    case AugmenterKind::EdgeDrop: return std::make_unique<EdgeDropAugmenter>(cfg.drop_rate, cfg.seed);
    case AugmenterKind::Identity: return std::make_unique<IdentityAugmenter>();
    }
    throw ConfigError("unknown augmenter kind");
}

} // namespace swag
