#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "swag/errors.hpp"

namespace swag {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Undirected simple graph with dense 0/1 adjacency and an n x d feature matrix.
struct Graph {
    Matrix adjacency;
    Matrix features;
    std::optional<int> label;

    Index num_nodes() const { return adjacency.rows(); }
    Index feature_dim() const { return features.cols(); }
    Index num_edges() const;
};

/// Throws ContractError unless the adjacency is square, symmetric, 0/1 with a
/// zero diagonal, and the feature matrix has one row per node.
void validate(const Graph& g);

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;
    int num_classes = 0;
    Index feature_dim = 0;

    std::size_t size() const { return graphs.size(); }
    std::vector<int> labels() const;
};

void validate(const Dataset& ds);

/// Personalized-PageRank coefficients beta_j = alpha (1 - alpha)^j, truncated at `depth`.
struct DiffusionConfig {
    double alpha = 0.15;
    int depth = 3;

    double coefficient(int j) const { return alpha * std::pow(1.0 - alpha, j); }
    void validate() const;

    friend bool operator==(const DiffusionConfig&, const DiffusionConfig&) = default;
};

/// Column of node degrees as reals.
Matrix degree_features(const Graph& g);
Matrix degree_features(const Matrix& adjacency);

/// Builds a Graph from an adjacency matrix, attaching degree features.
Graph graph_from_adjacency(Matrix adjacency, std::optional<int> label = std::nullopt);

/// D^{-1/2} A D^{-1/2}. Isolated nodes get a zero scaling entry, so their row
/// and column vanish.
template <typename Derived>
MatrixX<typename Derived::Scalar> transition_matrix(const Eigen::MatrixBase<Derived>& adjacency) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> degree = adjacency.rowwise().sum();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_sqrt =
        degree.unaryExpr([](Scalar d) { return d > Scalar(0) ? Scalar(1) / std::sqrt(d) : Scalar(0); });
    return inv_sqrt.asDiagonal() * adjacency * inv_sqrt.asDiagonal();
}

/// Truncated diffusion sum_{j=0}^{depth} beta_j T^j with powers materialized
/// one step at a time.
template <typename Derived>
MatrixX<typename Derived::Scalar> diffuse(const Eigen::MatrixBase<Derived>& adjacency,
                                          const DiffusionConfig& cfg) {
    using Scalar = typename Derived::Scalar;
    cfg.validate();
    const Index n = adjacency.rows();
    const MatrixX<Scalar> transition = transition_matrix(adjacency);
    MatrixX<Scalar> power = MatrixX<Scalar>::Identity(n, n);
    MatrixX<Scalar> out = Scalar(cfg.coefficient(0)) * power;
    for (int j = 1; j <= cfg.depth; ++j) {
        power = power * transition;
        out.noalias() += Scalar(cfg.coefficient(j)) * power;
    }
    return (out + out.transpose()) / Scalar(2);
}

inline Matrix diffuse(const Graph& g, const DiffusionConfig& cfg) { return diffuse(g.adjacency, cfg); }

/// Relabels nodes: node u of the result is node perm[u] of `g`.
Graph permute(const Graph& g, const std::vector<Index>& perm);

} // namespace swag
