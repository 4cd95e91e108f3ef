#pragma once

#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "swag/graph.hpp"

namespace swag {

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct JacobiOptions {
    /// Convergence when every off-diagonal magnitude is below
    /// tolerance * max(1, ||A||_F).
    double tolerance = 1e-12;
    int max_sweeps = 100;
};

/// Eigenvalues sorted by descending magnitude (ties: larger value first) and
/// the matching orthonormal eigenvectors as columns.
template <typename Scalar>
struct SpectralDecomposition {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;
    MatrixX<Scalar> eigenvectors;
    int sweeps = 0;

    MatrixX<Scalar> reconstruct() const {
        return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
    }
};

/// Cyclic-by-row Jacobi rotations on a symmetric matrix. Each rotation
/// annihilates one off-diagonal pair; sweeps repeat until the largest
/// off-diagonal entry drops below tolerance.
template <typename Derived>
SpectralDecomposition<typename Derived::Scalar> symmetric_eig(const Eigen::MatrixBase<Derived>& input,
                                                              const JacobiOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    const Index n = input.rows();
    if (input.cols() != n) throw ContractError("symmetric_eig: matrix must be square");

    MatrixX<Scalar> a = input;
    const Scalar scale = std::max(Scalar(1), a.norm());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(opts.tolerance) * scale)
        throw ContractError("symmetric_eig: matrix is not symmetric");
    a = ((a + a.transpose()) / Scalar(2)).eval();

    MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
    const Scalar tol = Scalar(opts.tolerance) * scale;
    auto off_diagonal_max = [&]() {
        Scalar worst(0);
        for (Index q = 1; q < n; ++q)
            for (Index p = 0; p < q; ++p) worst = std::max(worst, abs(a(p, q)));
        return worst;
    };

    int sweep = 0;
    Scalar residual = off_diagonal_max();
    while (residual >= tol) {
        if (sweep == opts.max_sweeps) {
            std::ostringstream msg;
            msg << "symmetric_eig: no convergence after " << sweep << " sweeps, residual " << residual;
            throw NumericalError(msg.str());
        }
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (a(p, q) == Scalar(0)) continue;
                Eigen::JacobiRotation<Scalar> rot;
                rot.makeJacobi(a, p, q);
                a.applyOnTheLeft(p, q, rot.adjoint());
                a.applyOnTheRight(p, q, rot);
                a(p, q) = a(q, p) = Scalar(0);
                v.applyOnTheRight(p, q, rot);
            }
        }
        ++sweep;
        residual = off_diagonal_max();
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
        const Scalar ai = abs(a(i, i)), aj = abs(a(j, j));
        return ai != aj ? ai > aj : a(i, i) > a(j, j);
    });
    SpectralDecomposition<Scalar> out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = a(order[k], order[k]);
        out.eigenvectors.col(k) = v.col(order[k]);
    }
    out.sweeps = sweep;
    return out;
}

// ---------------------------------------------------------------------------
// Universal singular value thresholding
// ---------------------------------------------------------------------------

template <typename Scalar>
struct UsvtEstimate {
    MatrixX<Scalar> theta;  // clipped probability matrix
    Index kept_rank = 0;    // |S|
    Scalar threshold = 0;   // tau * sqrt(m)
};

/// For symmetric A the singular values are |lambda_i| and
/// sigma_i u_i v_i^T = lambda_i u_i u_i^T, so the thresholded reconstruction is
/// sum over kept i of lambda_i u_i u_i^T. Components with |lambda_i| >= tau sqrt(m)
/// are kept (ties included, up to 1e-12 relative slack), the result is clipped
/// to [0, 1].
template <typename Derived>
UsvtEstimate<typename Derived::Scalar> usvt(const Eigen::MatrixBase<Derived>& adjacency, double tau) {
    using Scalar = typename Derived::Scalar;
    if (!(tau > 0.0)) throw ConfigError("usvt: tau must be positive");
    const Index m = adjacency.rows();
    const auto eig = symmetric_eig(adjacency);
    UsvtEstimate<Scalar> out;
    out.threshold = Scalar(tau * std::sqrt(static_cast<double>(m)));
    const Scalar cutoff = out.threshold * (Scalar(1) - Scalar(1e-12));
    MatrixX<Scalar> recon = MatrixX<Scalar>::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
        if (std::abs(eig.eigenvalues(i)) < cutoff) break;  // sorted by magnitude
        recon.noalias() += eig.eigenvalues(i) * eig.eigenvectors.col(i) * eig.eigenvectors.col(i).transpose();
        ++out.kept_rank;
    }
    recon = ((recon + recon.transpose()) / Scalar(2)).eval();
    out.theta = recon.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
    return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> usvt_estimate(const Eigen::MatrixBase<Derived>& adjacency, double tau) {
    return usvt(adjacency, tau).theta;
}

/// Independent Bernoulli draw for every pair u < v, mirrored; zero diagonal.
Matrix sample_augmentation(const Matrix& theta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic graphs and baseline perturbation
// ---------------------------------------------------------------------------

/// Block-constant edge probability matrix (diagonal included).
Matrix sbm_probabilities(const std::vector<Index>& block_sizes, double intra, double inter);

/// Stochastic block model sample with degree features.
Graph generate_sbm(const std::vector<Index>& block_sizes, double intra, double inter, std::uint64_t seed);

/// Removes each edge independently with probability `rate`; features kept.
Graph edge_drop_baseline(const Graph& g, double rate, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Augmenters
// ---------------------------------------------------------------------------

enum class AugmenterKind { Lga, EdgeDrop, Identity };

std::string to_string(AugmenterKind kind);
AugmenterKind augmenter_from_string(const std::string& s);

struct AugmenterConfig {
    AugmenterKind kind = AugmenterKind::Lga;
    double tau = 2.02;
    double drop_rate = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Draws a positive view of a graph. Randomness is a pure function of
/// (seed, graph_index, epoch).
class Augmenter {
public:
    virtual ~Augmenter() = default;
    virtual Graph augment(const Graph& g, std::size_t graph_index, std::uint64_t epoch) const = 0;
};

class IdentityAugmenter final : public Augmenter {
public:
    Graph augment(const Graph& g, std::size_t, std::uint64_t) const override { return g; }
};

class EdgeDropAugmenter final : public Augmenter {
public:
    EdgeDropAugmenter(double rate, std::uint64_t seed);
    Graph augment(const Graph& g, std::size_t graph_index, std::uint64_t epoch) const override;

private:
    double rate_;
    std::uint64_t seed_;
};

/// Latent graph augmentation. The USVT estimate of each graph is computed on
/// first use and cached under its index; every call draws a fresh Bernoulli
/// sample from it. Node features are copied unchanged.
class LgaAugmenter final : public Augmenter {
public:
    LgaAugmenter(double tau, std::uint64_t seed);
    Graph augment(const Graph& g, std::size_t graph_index, std::uint64_t epoch) const override;

    const UsvtEstimate<double>& estimate(const Graph& g, std::size_t graph_index) const;
    double tau() const { return tau_; }

private:
    double tau_;
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::size_t, UsvtEstimate<double>> cache_;
};

std::unique_ptr<Augmenter> make_augmenter(const AugmenterConfig& cfg);

} // namespace swag
