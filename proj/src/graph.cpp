#include "swag/graph.hpp"

#include <sstream>

namespace swag {

Index Graph::num_edges() const {
    Index count = 0;
    for (Index u = 0; u < adjacency.rows(); ++u)
        for (Index v = u + 1; v < adjacency.cols(); ++v)
            if (adjacency(u, v) != 0.0) ++count;
    return count;
}

void validate(const Graph& g) {
    const Index n = g.adjacency.rows();
    if (n == 0 || g.adjacency.cols() != n)
        throw ContractError("graph: adjacency must be a non-empty square matrix");
    if (g.features.rows() != n) {
        std::ostringstream msg;
        msg << "graph: feature matrix has " << g.features.rows() << " rows for " << n << " nodes";
        throw ContractError(msg.str());
    }
    for (Index u = 0; u < n; ++u) {
        if (g.adjacency(u, u) != 0.0) throw ContractError("graph: adjacency diagonal must be zero");
        for (Index v = u + 1; v < n; ++v) {
            const double a = g.adjacency(u, v);
            if (a != g.adjacency(v, u)) throw ContractError("graph: adjacency must be symmetric");
            if (a != 0.0 && a != 1.0) throw ContractError("graph: adjacency must be binary");
        }
    }
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(g.label.value_or(-1));
    return out;
}

void validate(const Dataset& ds) {
    if (ds.num_classes < 1) throw ContractError("dataset: num_classes must be positive");
    for (const auto& g : ds.graphs) {
        validate(g);
        if (g.feature_dim() != ds.feature_dim)
            throw ContractError("dataset: inconsistent feature dimension");
        if (g.label && (*g.label < 0 || *g.label >= ds.num_classes))
            throw ContractError("dataset: label out of range");
    }
}

void DiffusionConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("diffusion: alpha must lie in (0, 1)");
    if (depth < 0) throw ConfigError("diffusion: depth must be non-negative");
}

Matrix degree_features(const Matrix& adjacency) { return adjacency.rowwise().sum(); }

Matrix degree_features(const Graph& g) { return degree_features(g.adjacency); }

Graph graph_from_adjacency(Matrix adjacency, std::optional<int> label) {
    Graph g;
    g.features = degree_features(adjacency);
    g.adjacency = std::move(adjacency);
    g.label = label;
    return g;
}

Graph permute(const Graph& g, const std::vector<Index>& perm) {
    const Index n = g.num_nodes();
    if (static_cast<Index>(perm.size()) != n) throw ContractError("permute: permutation size mismatch");
    Graph out;
    out.label = g.label;
    out.adjacency.resize(n, n);
    out.features.resize(n, g.feature_dim());
    for (Index u = 0; u < n; ++u) {
        out.features.row(u) = g.features.row(perm[u]);
        for (Index v = 0; v < n; ++v) out.adjacency(u, v) = g.adjacency(perm[u], perm[v]);
    }
    return out;
}

} // namespace swag
