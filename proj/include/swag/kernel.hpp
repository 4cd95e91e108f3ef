#pragma once

#include <span>
#include <vector>

#include "swag/autodiff.hpp"
#include "swag/graph.hpp"
#include "swag/random.hpp"

namespace swag {

/// Trainable pseudo-graph: raw m x m weights (mapped to an adjacency in (0,1)
/// by hidden_adjacency) and m x d_h node features.
struct HiddenGraph {
    ad::Parameter raw_weights;
    ad::Parameter hidden_features;

    Index num_nodes() const { return raw_weights.value.rows(); }
};

/// Affine map from input features (d) to the hidden feature space (d_h).
struct FeatureMap {
    ad::Parameter weight;  // d x d_h
    ad::Parameter bias;    // 1 x d_h

    Matrix apply(const Matrix& x) const { return (x * weight.value).rowwise() + bias.value.row(0); }
};

struct KernelConfig {
    int num_hidden = 16;   // M
    int max_walk = 3;      // P
    int hidden_nodes = 10; // m
    int hidden_dim = 32;   // d_h
    DiffusionConfig diffusion;

    Index output_dim() const { return static_cast<Index>(num_hidden) * max_walk; }
    void validate() const;
};

struct SwagParams {
    std::vector<HiddenGraph> hidden_graphs;
    FeatureMap feature_map;

    /// Raw weights ~ N(0, 1), hidden features ~ N(0, 1/sqrt(d_h)) (standard
    /// deviation), feature map weights ~ U[-1/sqrt(d), 1/sqrt(d)], bias 0.
    static SwagParams init(const KernelConfig& cfg, Index input_dim, Rng& rng);

    std::vector<ad::Parameter*> parameters();
    std::vector<const ad::Parameter*> parameters() const;
    /// Throws ContractError if the shapes disagree with `cfg` / `input_dim`.
    void check(const KernelConfig& cfg, Index input_dim) const;
};

/// sigmoid((raw + raw^T) / 2) with the diagonal forced to zero.
template <typename Derived>
MatrixX<typename Derived::Scalar> hidden_adjacency(const Eigen::MatrixBase<Derived>& raw) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> sym = (raw + raw.transpose()) / Scalar(2);
    MatrixX<Scalar> out = sym.unaryExpr([](Scalar x) { return Scalar(ad::sigmoid(static_cast<double>(x))); });
    out.diagonal().setZero();
    return out;
}

inline Matrix hidden_adjacency(const HiddenGraph& h) { return hidden_adjacency(h.raw_weights.value); }

/// Differentiable version of hidden_adjacency.
ad::Var hidden_adjacency(ad::Var raw);

/// Length-p constituent of the feature-weighted random-walk kernel, computed
/// term by term over all (i, j, k, l). Meant as a reference, not for training.
double exact_rw_kernel(const Graph& g, const Graph& g2, int p);

/// trace(B^p S B'^p S^T) with S = Xm H^T, evaluated as
/// sum((B^p S) .* (S B'^p)) for symmetric B'. Returns the values for
/// p = 1..max_walk, reusing each power for the next.
template <typename DB, typename DX, typename DA, typename DH>
std::vector<typename DB::Scalar> smoothed_kernel_series(const Eigen::MatrixBase<DB>& b,
                                                        const Eigen::MatrixBase<DX>& xm,
                                                        const Eigen::MatrixBase<DA>& hidden_adj,
                                                        const Eigen::MatrixBase<DH>& hidden_features, int max_walk) {
    using Scalar = typename DB::Scalar;
    if (b.rows() != b.cols() || xm.rows() != b.rows() || hidden_adj.rows() != hidden_adj.cols() ||
        hidden_features.rows() != hidden_adj.rows() || hidden_features.cols() != xm.cols())
        throw ContractError("smoothed_kernel: dimension mismatch");
    if (max_walk < 1) throw ContractError("smoothed_kernel: walk length must be >= 1");
    const MatrixX<Scalar> s = xm * hidden_features.transpose();
    MatrixX<Scalar> left = s;   // B^p S
    MatrixX<Scalar> right = s;  // S B'^p
    std::vector<Scalar> out;
    out.reserve(static_cast<std::size_t>(max_walk));
    for (int p = 1; p <= max_walk; ++p) {
        left = b * left;
        right = right * hidden_adj;
        out.push_back(left.cwiseProduct(right).sum());
    }
    return out;
}

template <typename DB, typename DX, typename DA, typename DH>
typename DB::Scalar smoothed_kernel(const Eigen::MatrixBase<DB>& b, const Eigen::MatrixBase<DX>& xm,
                                    const Eigen::MatrixBase<DA>& hidden_adj,
                                    const Eigen::MatrixBase<DH>& hidden_features, int p) {
    return smoothed_kernel_series(b, xm, hidden_adj, hidden_features, p).back();
}

inline double smoothed_kernel(const Matrix& b, const Matrix& xm, const HiddenGraph& h, int p) {
    return smoothed_kernel(b, xm, hidden_adjacency(h), h.hidden_features.value, p);
}

/// Per-graph data that does not depend on parameters: features and the
/// diffusion powers B^1..B^P.
struct PreparedGraph {
    Matrix features;
    std::vector<Matrix> diffusion_powers;
};

PreparedGraph prepare(const Graph& g, const KernelConfig& cfg);
std::vector<PreparedGraph> prepare(std::span<const Graph> graphs, const KernelConfig& cfg);

/// Encoding of length M*P; entry k*P + (p-1) is the kernel against hidden graph k
/// at walk length p.
RowVector swag_encode(const Graph& g, const SwagParams& params, const KernelConfig& cfg);
RowVector swag_encode(const PreparedGraph& g, const SwagParams& params, const KernelConfig& cfg);
/// One encoding row per graph.
Matrix swag_encode(std::span<const PreparedGraph> graphs, const SwagParams& params, const KernelConfig& cfg);

/// Records SWAG encodings on a tape. The hidden-graph side (adjacencies and
/// their powers) is built once at construction and shared by every graph
/// encoded afterwards. A batch is encoded in one pass over the stacked nodes.
class SwagTapeEncoder {
public:
    /// With trainable == false the parameters enter the tape as constants.
    SwagTapeEncoder(ad::Tape& tape, SwagParams& params, const KernelConfig& cfg, bool trainable = true);

    ad::Var encode(const PreparedGraph& g);
    ad::Var encode(std::span<const PreparedGraph* const> graphs);

private:
    ad::Tape& tape_;
    KernelConfig cfg_;
    ad::Var weight_, bias_;
    std::vector<ad::Var> hidden_features_t_;        // per hidden graph, d_h x m
    std::vector<std::vector<ad::Var>> hidden_powers_;  // [k][p - 1] = B'_k^p
    std::vector<ad::Var> grouping_;                 // (M m) x (M P) selectors, p = 1..P
};

} // namespace swag
