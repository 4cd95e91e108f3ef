#include <gtest/gtest.h>

#include <cmath>

#include "swag/gradcheck.hpp"
#include "swag/ssl.hpp"
#include "support.hpp"

using namespace swag;
using namespace swag::testing;

namespace {

double infonce_value(const Matrix& sim) {
    ad::Tape t;
    return infonce_from_similarities(t.constant(sim)).scalar();
}

double negative_cosine_value(const Matrix& a, const Matrix& p) {
    ad::Tape t;
    return negative_cosine(t.constant(a), t.constant(p)).scalar();
}

// Reference: mean over rows of -log(exp(s_ii) / sum_j exp(s_ij)).
double infonce_reference(const Matrix& sim) {
    double total = 0.0;
    for (Index i = 0; i < sim.rows(); ++i) {
        double denom = 0.0;
        for (Index j = 0; j < sim.cols(); ++j) denom += std::exp(sim(i, j));
        total += -std::log(std::exp(sim(i, i)) / denom);
    }
    return total / static_cast<double>(sim.rows());
}

} // namespace

TEST(InfoNce, Examples) {
    EXPECT_NEAR(infonce_value(Matrix::Constant(2, 2, 0.3)), std::log(2.0), 1e-15);
    EXPECT_NEAR(infonce_value((Matrix(2, 2) << 2, 0, 0, 2).finished()), 0.126928, 1e-6);
    EXPECT_NEAR(infonce_value((Matrix(2, 2) << 2, 0, 0, 2).finished()), std::log1p(std::exp(-2.0)), 1e-15);
    EXPECT_LT(infonce_value((Matrix(2, 2) << 1e3, 0, 0, 1e3).finished()), 1e-300);
}

TEST(InfoNce, BatchOfOneHasNoNegatives) {
    EXPECT_THROW(infonce_value(Matrix::Ones(1, 1)), ContractError);
    EXPECT_THROW(infonce_value(Matrix::Ones(2, 3)), ContractError);
}

TEST(InfoNce, Properties) {
    Rng rng(3);
    for (Index b = 2; b <= 8; ++b) {
        EXPECT_NEAR(infonce_value(Matrix::Constant(b, b, -1.2)), std::log(static_cast<double>(b)), 1e-12);
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix sim = 3.0 * random_matrix(b, b, rng);
            const double loss = infonce_value(sim);
            EXPECT_GE(loss, 0.0);
            EXPECT_NEAR(loss, infonce_reference(sim), 1e-12);
            EXPECT_NEAR(infonce_value(sim.array() + 57.25), loss, 1e-10);
        }
    }
}

TEST(InfoNce, LiteralObjectiveRewardsLowerPositives) {
    ad::Tape t;
    ad::Var sim = t.variable((Matrix(2, 2) << 1, 0, 0, 1).finished());
    t.backward(literal_infonce_objective(sim));
    EXPECT_GT(t.grad(sim)(0, 0), 0.0);  // descent lowers the positive similarity

    ad::Tape t2;
    ad::Var sim2 = t2.variable((Matrix(2, 2) << 1, 0, 0, 1).finished());
    t2.backward(infonce_from_similarities(sim2));
    EXPECT_LT(t2.grad(sim2)(0, 0), 0.0);
}

TEST(NonContrastive, Examples) {
    const Matrix a = (Matrix(1, 2) << 1, 0).finished();
    EXPECT_NEAR(negative_cosine_value(a, a), -1.0, 1e-15);
    EXPECT_NEAR(negative_cosine_value(a, (Matrix(1, 2) << 0, 3).finished()), 0.0, 1e-15);
    EXPECT_NEAR(negative_cosine_value(a, (Matrix(1, 2) << 1, 1).finished() / std::sqrt(2.0)), -0.707107, 1e-6);
    EXPECT_EQ(negative_cosine_value(Matrix::Zero(1, 2), a), 0.0);
}

TEST(NonContrastive, BoundedAndColinearMinimum) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_matrix(5, 3, rng), p = random_matrix(5, 3, rng);
        const double v = negative_cosine_value(a, p);
        EXPECT_GE(v, -1.0 - 1e-12);
        EXPECT_LE(v, 1.0 + 1e-12);
        Matrix scaled = a;
        for (Index i = 0; i < 5; ++i) scaled.row(i) *= 0.5 + i;
        EXPECT_NEAR(negative_cosine_value(a, scaled), -1.0, 1e-12);
    }
    EXPECT_THROW(negative_cosine_value(Matrix::Zero(0, 2), Matrix::Zero(0, 2)), ContractError);
}

TEST(NonContrastive, StoppedBranchGetsNoGradient) {
    Rng rng(5);
    ad::Parameter online(random_matrix(3, 4, rng)), target(random_matrix(3, 4, rng));
    const Matrix xa = random_matrix(6, 3, rng), xp = random_matrix(6, 3, rng);
    ad::Tape t;
    t.backward(negative_cosine(t.constant(xa) * t.param(online), t.constant(xp) * t.param(target)));
    EXPECT_TRUE(target.grad.isZero(0.0));
    EXPECT_GT(online.grad.norm(), 0.0);
}

namespace {

struct ToyBatch {
    KernelConfig cfg;
    SwagParams params;
    Mlp head;
    std::vector<PreparedGraph> anchors, positives;

    explicit ToyBatch(std::uint64_t seed) {
        cfg.num_hidden = 2;
        cfg.max_walk = 2;
        cfg.hidden_nodes = 3;
        cfg.hidden_dim = 3;
        Rng rng(seed);
        params = SwagParams::init(cfg, 2, rng);
        params.feature_map.bias.value = 0.3 * random_matrix(1, 3, rng);
        head = Mlp(cfg.output_dim(), 5, 4, rng);
        for (int i = 0; i < 3; ++i) {
            const Graph g = random_graph(4, 2, rng, 0.6);
            anchors.push_back(prepare(g, cfg));
            positives.push_back(prepare(edge_drop_baseline(g, 0.3, seed + i), cfg));
        }
    }

    std::vector<ad::Parameter*> all_parameters() {
        auto out = params.parameters();
        for (auto* p : head.parameters()) out.push_back(p);
        return out;
    }

    SslBatch encode(ad::Tape& t) {
        SwagTapeEncoder enc(t, params, cfg);
        std::vector<const PreparedGraph*> a, p;
        for (auto& g : anchors) a.push_back(&g);
        for (auto& g : positives) p.push_back(&g);
        return {enc.encode(a), enc.encode(p)};
    }
};

} // namespace

TEST(SslGradients, InfoNceThroughEncoderAndHead) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ToyBatch toy(seed);
        auto loss = [&](ad::Tape& t) { return infonce_loss(toy.encode(t), toy.head); };
        EXPECT_LE(ad::finite_diff_check(loss, toy.all_parameters()).max_relative_error, 1e-4) << seed;
    }
}

TEST(SslGradients, NonContrastiveMatchesFrozenBranchDifferences) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ToyBatch toy(seed);
        // The stopped branch is a constant for differentiation purposes, so the
        // finite-difference reference freezes it at its current value.
        Matrix frozen;
        {
            ad::Tape t;
            const SslBatch b = toy.encode(t);
            frozen = toy.head.forward(t, b.positives).value();
        }
        auto frozen_loss = [&](ad::Tape& t) {
            const SslBatch b = toy.encode(t);
            return negative_cosine(toy.head.forward(t, b.anchors), t.constant(frozen));
        };
        EXPECT_LE(ad::finite_diff_check(frozen_loss, toy.all_parameters()).max_relative_error, 1e-4) << seed;

        // The real loss has exactly the frozen-branch gradient.
        auto grads = [&](auto&& build) {
            for (auto* p : toy.all_parameters()) p->zero_grad();
            ad::Tape t;
            t.backward(build(t));
            std::vector<Matrix> out;
            for (auto* p : toy.all_parameters()) out.push_back(p->grad);
            return out;
        };
        const auto real = grads([&](ad::Tape& t) { return noncontrastive_loss(toy.encode(t), toy.head); });
        const auto reference = grads(frozen_loss);
        for (std::size_t i = 0; i < real.size(); ++i)
            EXPECT_LE((real[i] - reference[i]).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, reference[i].norm()));
    }
}

TEST(SslBatches, IdentityAugmentationCopiesAnchors) {
    KernelConfig cfg;
    Rng rng(6);
    SwagParams params = SwagParams::init(cfg, 1, rng);
    std::vector<Graph> graphs;
    for (int i = 0; i < 4; ++i) graphs.push_back(graph_from_adjacency(random_adjacency(6, 0.5, rng)));
    const auto prepared = prepare(std::span<const Graph>(graphs), cfg);
    IdentityAugmenter identity;
    std::vector<std::size_t> idx{0, 1, 2, 3};
    ad::Tape t;
    SwagTapeEncoder enc(t, params, cfg);
    const SslBatch b = make_ssl_batch(enc, graphs, prepared, idx, identity, 0, cfg);
    EXPECT_EQ(b.anchors.value(), b.positives.value());
}

TEST(SslBatches, LgaOnCompleteGraphsIsAFixedPoint) {
    KernelConfig cfg;
    Rng rng(7);
    SwagParams params = SwagParams::init(cfg, 1, rng);
    std::vector<Graph> graphs;
    for (Index n = 3; n <= 6; ++n) graphs.push_back(graph_from_adjacency(complete_adjacency(n)));
    const auto prepared = prepare(std::span<const Graph>(graphs), cfg);
    LgaAugmenter lga(0.3, 1);
    std::vector<std::size_t> idx{0, 1, 2, 3};
    for (std::uint64_t epoch = 0; epoch < 3; ++epoch) {
        ad::Tape t;
        SwagTapeEncoder enc(t, params, cfg);
        const SslBatch b = make_ssl_batch(enc, graphs, prepared, idx, lga, epoch, cfg);
        EXPECT_EQ(b.anchors.value(), b.positives.value());
    }
}

TEST(SslBatches, DeterministicUnderSeed) {
    KernelConfig cfg;
    std::vector<Graph> graphs;
    for (int i = 0; i < 4; ++i) graphs.push_back(generate_sbm({5, 5}, 0.8, 0.2, i));
    const auto prepared = prepare(std::span<const Graph>(graphs), cfg);
    std::vector<std::size_t> idx{3, 1, 2};
    auto run = [&] {
        Rng rng(8);
        SwagParams params = SwagParams::init(cfg, 1, rng);
        LgaAugmenter lga(0.5, 99);
        ad::Tape t;
        SwagTapeEncoder enc(t, params, cfg);
        return make_ssl_batch(enc, graphs, prepared, idx, lga, 4, cfg).positives.value();
    };
    EXPECT_EQ(run(), run());
}

TEST(Objectives, Names) {
    EXPECT_EQ(objective_from_string("infonce"), Objective::InfoNce);
    EXPECT_EQ(objective_from_string(to_string(Objective::SimSiam)), Objective::SimSiam);
    EXPECT_THROW(objective_from_string("byol"), ConfigError);
}
