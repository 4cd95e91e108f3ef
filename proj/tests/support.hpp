#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include <unistd.h>

#include "swag/graph.hpp"
#include "swag/random.hpp"

namespace swag::testing {

inline Matrix complete_adjacency(Index n) {
    Matrix a = Matrix::Ones(n, n);
    a.diagonal().setZero();
    return a;
}

inline Matrix path_adjacency(Index n) {
    Matrix a = Matrix::Zero(n, n);
    for (Index u = 0; u + 1 < n; ++u) a(u, u + 1) = a(u + 1, u) = 1.0;
    return a;
}

inline Matrix random_adjacency(Index n, double density, Rng& rng) {
    std::bernoulli_distribution edge(density);
    Matrix a = Matrix::Zero(n, n);
    for (Index u = 0; u < n; ++u)
        for (Index v = u + 1; v < n; ++v)
            if (edge(rng)) a(u, v) = a(v, u) = 1.0;
    return a;
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

inline Graph random_graph(Index n, Index d, Rng& rng, double density = 0.5) {
    Graph g;
    g.adjacency = random_adjacency(n, density, rng);
    g.features = random_matrix(n, d, rng);
    return g;
}

inline std::vector<Index> random_permutation(Index n, Rng& rng) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index(0));
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

/// Four triangles labelled 0 and four three-node paths labelled 1.
inline Dataset toy_dataset() {
    Dataset ds;
    ds.name = "toy";
    ds.num_classes = 2;
    for (int i = 0; i < 4; ++i) ds.graphs.push_back(graph_from_adjacency(complete_adjacency(3), 0));
    for (int i = 0; i < 4; ++i) ds.graphs.push_back(graph_from_adjacency(path_adjacency(3), 1));
    ds.feature_dim = 1;
    return ds;
}

/// Two classes of random graphs that differ in density, with degree features.
inline Dataset density_dataset(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<Index> size(5, 9);
    Dataset ds;
    ds.name = "density";
    ds.num_classes = 2;
    for (int i = 0; i < 2 * per_class; ++i) {
        const int label = i % 2;
        ds.graphs.push_back(graph_from_adjacency(random_adjacency(size(rng), label ? 0.8 : 0.25, rng), label));
    }
    ds.feature_dim = 1;
    return ds;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("swag_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

    void write(const std::string& file, const std::string& text) const {
        std::ofstream out(path_ / file);
        out << text;
    }

private:
    std::filesystem::path path_;
};

} // namespace swag::testing
