#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "swag/report.hpp"
#include "swag/tu_io.hpp"
#include "support.hpp"

using namespace swag;
using namespace swag::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines_with(const std::string& text, const std::string& needle) {
    int n = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.find(needle) != std::string::npos) ++n;
    return n;
}

RunResult sample_result() {
    RunResult r;
    r.config.dataset = "MUTAG";
    r.config.kernel.num_hidden = 7;
    r.config.augmenter.tau = 1.25;
    r.config.mode = Mode::Finetune;
    for (int f = 0; f < 3; ++f) {
        FoldResult fr;
        fr.fold = f;
        fr.test_accuracy = 0.1 * f + 1.0 / 3.0;
        fr.val_accuracy = 0.5;
        fr.best_epoch = 4 + f;
        fr.seconds = 0.25;
        fr.adaptation = "finetune";
        fr.loss_curve = {0.7, 0.5, 0.3};
        fr.val_curve = {0.5, 0.5};
        fr.test_indices = {std::size_t(f), std::size_t(f + 3)};
        r.folds.push_back(fr);
    }
    r.recompute_summary();
    return r;
}

} // namespace

TEST(Config, RoundTrip) {
    TrainConfig cfg;
    cfg.dataset = "PROTEINS";
    cfg.mode = Mode::Probe;
    cfg.kernel.num_hidden = 5;
    cfg.kernel.diffusion.alpha = 0.35;
    cfg.kernel.diffusion.depth = 2;
    cfg.lr = 0.003;
    cfg.objective = Objective::SimSiam;
    cfg.augmenter.kind = AugmenterKind::EdgeDrop;
    cfg.augmenter.drop_rate = 0.1;
    cfg.seed = 1234567890123ULL;
    cfg.compare_adaptations = true;
    const TrainConfig back = config_from_json(Json::parse(config_to_json(cfg).dump()));
    EXPECT_EQ(config_to_json(back), config_to_json(cfg));
    EXPECT_EQ(back.seed, cfg.seed);
    EXPECT_EQ(back.kernel.diffusion.alpha, 0.35);
}

TEST(Config, PartialFileKeepsDefaults) {
    const TrainConfig cfg = config_from_json(Json::parse(R"({"epochs": 7, "kernel": {"hidden_dim": 4}})"));
    EXPECT_EQ(cfg.epochs, 7);
    EXPECT_EQ(cfg.kernel.hidden_dim, 4);
    EXPECT_EQ(cfg.kernel.num_hidden, TrainConfig{}.kernel.num_hidden);
    EXPECT_EQ(cfg.lr, 0.01);
    EXPECT_THROW(config_from_json(Json::parse(R"({"mode": "linear"})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse(R"({"epochs": "many"})")), ConfigError);
    EXPECT_THROW(config_from_json(Json::parse("[1]")), ConfigError);
}

TEST(Config, LoadFromFile) {
    TempDir dir;
    dir.write("cfg.json", R"({"dataset": "NCI1", "folds": 5})");
    const TrainConfig cfg = load_config(dir.path() / "cfg.json");
    EXPECT_EQ(cfg.dataset, "NCI1");
    EXPECT_EQ(cfg.folds, 5);
    EXPECT_THROW(load_config(dir.path() / "absent.json"), IoError);
    dir.write("broken.json", "{");
    EXPECT_THROW(load_config(dir.path() / "broken.json"), FormatError);
}

TEST(Results, JsonRoundTrip) {
    const RunResult r = sample_result();
    const RunResult back = result_from_json(Json::parse(result_to_json(r).dump()));
    ASSERT_EQ(back.folds.size(), 3u);
    EXPECT_NEAR(back.mean_accuracy, r.mean_accuracy, 1e-12);
    EXPECT_NEAR(back.std_accuracy, r.std_accuracy, 1e-12);
    for (std::size_t f = 0; f < 3; ++f) {
        EXPECT_EQ(back.folds[f].test_accuracy, r.folds[f].test_accuracy);
        EXPECT_EQ(back.folds[f].best_epoch, r.folds[f].best_epoch);
        EXPECT_EQ(back.folds[f].loss_curve, r.folds[f].loss_curve);
        EXPECT_EQ(back.folds[f].test_indices, r.folds[f].test_indices);
        EXPECT_EQ(back.folds[f].adaptation, "finetune");
    }
    RunResult recomputed = back;
    recomputed.recompute_summary();
    EXPECT_NEAR(recomputed.mean_accuracy, r.mean_accuracy, 1e-12);
    EXPECT_NEAR(recomputed.std_accuracy, r.std_accuracy, 1e-12);
    EXPECT_EQ(back.config.kernel.num_hidden, 7);
    EXPECT_THROW(result_from_json(Json::parse(R"({"folds": []})")), FormatError);
}

TEST(Results, FoldsCsv) {
    const std::string csv = folds_csv(sample_result());
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "fold,accuracy,epochs_to_best,seconds");
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream cells(line);
        std::string fold, acc, epochs, secs;
        std::getline(cells, fold, ',');
        std::getline(cells, acc, ',');
        std::getline(cells, epochs, ',');
        std::getline(cells, secs, ',');
        EXPECT_EQ(std::stoi(fold), rows);
        EXPECT_NEAR(std::stod(acc), 0.1 * rows + 1.0 / 3.0, 1e-15);
        EXPECT_EQ(std::stoi(epochs), 5 + rows);
        EXPECT_EQ(std::stod(secs), 0.25);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST(Results, AblationCsv) {
    const std::vector<double> values{0.3, 2.02};
    const std::vector<RunResult> results{sample_result(), sample_result()};
    const std::string csv = ablation_csv(AblationParameter::Tau, values, results);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,mean,std");
    EXPECT_EQ(count_lines_with(csv, ","), 3);
    EXPECT_NE(csv.find("\n2.02,"), std::string::npos);
    EXPECT_THROW(ablation_csv(AblationParameter::Tau, values, std::span<const RunResult>(results).first(1)),
                 ContractError);
}

TEST(HiddenGraphs, DotKeepsEdgesAtOrAboveThreshold) {
    Matrix adj = Matrix::Zero(3, 3);
    adj(0, 1) = adj(1, 0) = 0.9;
    adj(1, 2) = adj(2, 1) = 0.1;
    const std::string dot = hidden_graph_dot(adj, 0.5, "h");
    EXPECT_EQ(count_lines_with(dot, " -- "), 1);
    EXPECT_NE(dot.find("0 -- 1"), std::string::npos);
    EXPECT_EQ(count_lines_with(dot, ";"), 4);  // three nodes and one edge

    Rng rng(1);
    const Matrix full = hidden_adjacency(random_matrix(5, 5, rng));
    EXPECT_EQ(count_lines_with(hidden_graph_dot(full, 0.0, "k"), " -- "), 10);
    EXPECT_EQ(count_lines_with(hidden_graph_dot(adj, 0.9, "h"), " -- "), 1);
}

TEST(HiddenGraphs, ExportRoundTrip) {
    TempDir dir;
    KernelConfig cfg;
    cfg.num_hidden = 3;
    cfg.hidden_nodes = 4;
    Rng rng(2);
    const SwagParams params = SwagParams::init(cfg, 2, rng);
    export_hidden_graphs(params, 0.5, dir.path());
    const auto graphs = read_hidden_graphs(dir.path() / "hidden_graphs.json");
    ASSERT_EQ(graphs.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_LE((graphs[k] - hidden_adjacency(params.hidden_graphs[k])).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_TRUE(std::filesystem::exists(dir.path() / ("hidden_graph_" + std::to_string(k) + ".dot")));
    }
}

TEST(HiddenGraphs, UnwritableDirectoryIsAnIoError) {
    TempDir dir;
    dir.write("file", "x");
    KernelConfig cfg;
    Rng rng(3);
    const SwagParams params = SwagParams::init(cfg, 1, rng);
    EXPECT_THROW(export_hidden_graphs(params, 0.5, dir.path() / "file" / "sub"), IoError);
    EXPECT_THROW(write_text(dir.path() / "file" / "x.txt", "y"), IoError);
}

TEST(Models, ParametersRoundTrip) {
    KernelConfig cfg;
    cfg.num_hidden = 2;
    Rng rng(4);
    const SwagParams params = SwagParams::init(cfg, 3, rng);
    const SwagParams back = params_from_json(Json::parse(params_to_json(params).dump()));
    EXPECT_EQ(parameter_hash(back), parameter_hash(params));
    EXPECT_THROW(params_from_json(Json::parse(R"({"hidden_graphs": 3})")), FormatError);
}

TEST(Models, PretrainedRoundTrip) {
    KernelConfig cfg;
    cfg.num_hidden = 3;
    cfg.hidden_dim = 5;
    Rng rng(5);
    PretrainedModel m;
    m.encoder = SwagParams::init(cfg, 2, rng);
    m.head = Mlp(cfg.output_dim(), 4, 4, rng);
    m.objective = Objective::SimSiam;
    m.loss_curve = {-0.1, -0.5};
    const auto [back, kernel] = pretrained_from_json(Json::parse(pretrained_to_json(m, cfg).dump()));
    EXPECT_EQ(parameter_hash(back.encoder), parameter_hash(m.encoder));
    EXPECT_EQ(back.head.w2.value, m.head.w2.value);
    EXPECT_EQ(back.objective, Objective::SimSiam);
    EXPECT_EQ(back.loss_curve, m.loss_curve);
    EXPECT_EQ(kernel.num_hidden, 3);
    EXPECT_EQ(kernel.hidden_dim, 5);

    Json wrong = pretrained_to_json(m, cfg);
    wrong["kernel"]["num_hidden"] = 4;
    EXPECT_ANY_THROW(pretrained_from_json(wrong));
}

TEST(Augment, IdentityKeepsTheEdgeList) {
    TempDir dir;
    const Dataset ds = density_dataset(3, 6);
    write_tu_dataset(ds, dir.path() / "orig", "D");
    AugmenterConfig aug;
    aug.kind = AugmenterKind::Identity;
    const AugmentManifest m = augment_dataset(ds, aug, dir.path() / "aug", "D");
    EXPECT_EQ(slurp(dir.path() / "aug" / "D_A.txt"), slurp(dir.path() / "orig" / "D_A.txt"));
    for (const auto& r : m.kept_rank) EXPECT_FALSE(r.has_value());
    const Json manifest = read_json(dir.path() / "aug" / "manifest.json");
    EXPECT_EQ(manifest["augmenter"], "identity");
    EXPECT_TRUE(manifest["kept_rank"][0].is_null());
}

TEST(Augment, HugeThresholdEmptiesEveryGraph) {
    TempDir dir;
    const Dataset ds = density_dataset(3, 7);
    AugmenterConfig aug;
    aug.tau = 100.0;
    aug.seed = 3;
    const AugmentManifest m = augment_dataset(ds, aug, dir.path(), "E", 2);
    for (const auto& r : m.kept_rank) EXPECT_EQ(r, std::optional<Index>(0));
    const Dataset back = load_tu_dataset(dir.path(), "E");
    ASSERT_EQ(back.graphs.size(), ds.graphs.size());
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        EXPECT_EQ(back.graphs[i].num_nodes(), ds.graphs[i].num_nodes());
        EXPECT_TRUE(back.graphs[i].adjacency.isZero(0.0));
        EXPECT_EQ(back.graphs[i].label, ds.graphs[i].label);
    }
    const Json manifest = read_json(dir.path() / "manifest.json");
    EXPECT_EQ(manifest["epoch"], 2);
    EXPECT_EQ(manifest["seed"], 3);
    EXPECT_EQ(manifest["kept_rank"][0], 0);
}

TEST(Augment, CompleteGraphsKeepFullRankAtLowThreshold) {
    TempDir dir;
    Dataset ds;
    ds.name = "K";
    ds.num_classes = 2;
    for (Index n = 3; n <= 6; ++n) ds.graphs.push_back(graph_from_adjacency(complete_adjacency(n), n % 2));
    ds.feature_dim = 1;
    AugmenterConfig aug;
    aug.tau = 0.3;
    const AugmentManifest m = augment_dataset(ds, aug, dir.path(), "K");
    for (std::size_t i = 0; i < ds.graphs.size(); ++i)
        EXPECT_EQ(m.kept_rank[i], std::optional<Index>(ds.graphs[i].num_nodes()));
    const Dataset back = load_tu_dataset(dir.path(), "K");
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) EXPECT_EQ(back.graphs[i].adjacency, ds.graphs[i].adjacency);
}
