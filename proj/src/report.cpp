#include "swag/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "swag/tu_io.hpp"

namespace swag {

namespace fs = std::filesystem;

namespace {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw FormatError("expected a matrix as an array of rows");
    const auto rows = static_cast<Index>(j.size());
    const auto cols = rows == 0 ? Index(0) : static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw FormatError("ragged matrix in JSON");
        for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Json kernel_to_json(const KernelConfig& k) {
    return {{"num_hidden", k.num_hidden},
            {"max_walk", k.max_walk},
            {"hidden_nodes", k.hidden_nodes},
            {"hidden_dim", k.hidden_dim},
            {"diffusion", {{"alpha", k.diffusion.alpha}, {"depth", k.diffusion.depth}}}};
}

template <typename T>
void read_if(const Json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

KernelConfig kernel_from_json(const Json& j, KernelConfig k) {
    read_if(j, "num_hidden", k.num_hidden);
    read_if(j, "max_walk", k.max_walk);
    read_if(j, "hidden_nodes", k.hidden_nodes);
    read_if(j, "hidden_dim", k.hidden_dim);
    if (j.contains("diffusion")) {
        read_if(j["diffusion"], "alpha", k.diffusion.alpha);
        read_if(j["diffusion"], "depth", k.diffusion.depth);
    }
    return k;
}

Json mlp_to_json(const Mlp& m) {
    return {{"w1", matrix_to_json(m.w1.value)},
            {"b1", matrix_to_json(m.b1.value)},
            {"w2", matrix_to_json(m.w2.value)},
            {"b2", matrix_to_json(m.b2.value)}};
}

Mlp mlp_from_json(const Json& j) {
    Mlp m;
    m.w1 = ad::Parameter(matrix_from_json(j.at("w1")));
    m.b1 = ad::Parameter(matrix_from_json(j.at("b1")));
    m.w2 = ad::Parameter(matrix_from_json(j.at("w2")));
    m.b2 = ad::Parameter(matrix_from_json(j.at("b2")));
    return m;
}

std::string format_number(double x) {
    std::ostringstream out;
    out << std::setprecision(17) << x;
    return out.str();
}

} // namespace

Json config_to_json(const TrainConfig& cfg) {
    return {{"dataset", cfg.dataset},
            {"data_dir", cfg.data_dir},
            {"mode", to_string(cfg.mode)},
            {"kernel", kernel_to_json(cfg.kernel)},
            {"lr", cfg.lr},
            {"batch_size", cfg.batch_size},
            {"epochs", cfg.epochs},
            {"pretrain_epochs", cfg.pretrain_epochs},
            {"objective", to_string(cfg.objective)},
            {"augmenter",
             {{"kind", to_string(cfg.augmenter.kind)},
              {"tau", cfg.augmenter.tau},
              {"drop_rate", cfg.augmenter.drop_rate},
              {"seed", cfg.augmenter.seed}}},
            {"folds", cfg.folds},
            {"seed", cfg.seed},
            {"compare_adaptations", cfg.compare_adaptations},
            {"literal_objective", cfg.literal_objective}};
}

TrainConfig config_from_json(const Json& j, TrainConfig cfg) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    try {
        read_if(j, "dataset", cfg.dataset);
        read_if(j, "data_dir", cfg.data_dir);
        if (j.contains("mode")) cfg.mode = mode_from_string(j["mode"].get<std::string>());
        if (j.contains("kernel")) cfg.kernel = kernel_from_json(j["kernel"], cfg.kernel);
        read_if(j, "lr", cfg.lr);
        read_if(j, "batch_size", cfg.batch_size);
        read_if(j, "epochs", cfg.epochs);
        read_if(j, "pretrain_epochs", cfg.pretrain_epochs);
        if (j.contains("objective")) cfg.objective = objective_from_string(j["objective"].get<std::string>());
        if (j.contains("augmenter")) {
            const Json& a = j["augmenter"];
            if (a.contains("kind")) cfg.augmenter.kind = augmenter_from_string(a["kind"].get<std::string>());
            read_if(a, "tau", cfg.augmenter.tau);
            read_if(a, "drop_rate", cfg.augmenter.drop_rate);
            read_if(a, "seed", cfg.augmenter.seed);
        }
        read_if(j, "folds", cfg.folds);
        read_if(j, "seed", cfg.seed);
        read_if(j, "compare_adaptations", cfg.compare_adaptations);
        read_if(j, "literal_objective", cfg.literal_objective);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

TrainConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

Json result_to_json(const RunResult& r) {
    Json folds = Json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"fold", f.fold},
                         {"test_accuracy", f.test_accuracy},
                         {"val_accuracy", f.val_accuracy},
                         {"train_accuracy", f.train_accuracy},
                         {"best_epoch", f.best_epoch},
                         {"seconds", f.seconds},
                         {"adaptation", f.adaptation},
                         {"loss_curve", f.loss_curve},
                         {"pretrain_loss_curve", f.pretrain_loss_curve},
                         {"val_curve", f.val_curve},
                         {"test_curve", f.test_curve},
                         {"test_indices", f.test_indices}});
    return {{"config", config_to_json(r.config)},
            {"folds", std::move(folds)},
            {"mean_accuracy", r.mean_accuracy},
            {"std_accuracy", r.std_accuracy},
            {"wall_seconds", r.wall_seconds}};
}

RunResult result_from_json(const Json& j) {
    RunResult r;
    try {
        r.config = config_from_json(j.at("config"));
        for (const Json& f : j.at("folds")) {
            FoldResult fr;
            fr.fold = f.at("fold").get<int>();
            fr.test_accuracy = f.at("test_accuracy").get<double>();
            read_if(f, "val_accuracy", fr.val_accuracy);
            read_if(f, "train_accuracy", fr.train_accuracy);
            read_if(f, "best_epoch", fr.best_epoch);
            read_if(f, "seconds", fr.seconds);
            read_if(f, "adaptation", fr.adaptation);
            read_if(f, "loss_curve", fr.loss_curve);
            read_if(f, "pretrain_loss_curve", fr.pretrain_loss_curve);
            read_if(f, "val_curve", fr.val_curve);
            read_if(f, "test_curve", fr.test_curve);
            read_if(f, "test_indices", fr.test_indices);
            r.folds.push_back(std::move(fr));
        }
        r.mean_accuracy = j.at("mean_accuracy").get<double>();
        r.std_accuracy = j.at("std_accuracy").get<double>();
        read_if(j, "wall_seconds", r.wall_seconds);
    } catch (const Json::exception& e) {
        throw FormatError(std::string("run result: ") + e.what());
    }
    return r;
}

std::string folds_csv(const RunResult& r) {
    std::ostringstream out;
    out << "fold,accuracy,epochs_to_best,seconds\n";
    for (const auto& f : r.folds)
        out << f.fold << ',' << format_number(f.test_accuracy) << ',' << f.best_epoch + 1 << ','
            << format_number(f.seconds) << '\n';
    return out.str();
}

std::string ablation_csv(AblationParameter parameter, std::span<const double> values,
                         std::span<const RunResult> results) {
    if (values.size() != results.size()) throw ContractError("ablation_csv: one result per value expected");
    std::ostringstream out;
    out << to_string(parameter) << ",mean,std\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << format_number(values[i]) << ',' << format_number(results[i].mean_accuracy) << ','
            << format_number(results[i].std_accuracy) << '\n';
    return out.str();
}

Json params_to_json(const SwagParams& params) {
    Json hidden = Json::array();
    for (const auto& h : params.hidden_graphs)
        hidden.push_back({{"raw_weights", matrix_to_json(h.raw_weights.value)},
                          {"hidden_features", matrix_to_json(h.hidden_features.value)}});
    return {{"hidden_graphs", std::move(hidden)},
            {"feature_map",
             {{"weight", matrix_to_json(params.feature_map.weight.value)},
              {"bias", matrix_to_json(params.feature_map.bias.value)}}}};
}

SwagParams params_from_json(const Json& j) {
    SwagParams p;
    try {
        for (const Json& h : j.at("hidden_graphs")) {
            HiddenGraph g;
            g.raw_weights = ad::Parameter(matrix_from_json(h.at("raw_weights")));
            g.hidden_features = ad::Parameter(matrix_from_json(h.at("hidden_features")));
            p.hidden_graphs.push_back(std::move(g));
        }
        p.feature_map.weight = ad::Parameter(matrix_from_json(j.at("feature_map").at("weight")));
        p.feature_map.bias = ad::Parameter(matrix_from_json(j.at("feature_map").at("bias")));
    } catch (const Json::exception& e) {
        throw FormatError(std::string("parameters: ") + e.what());
    }
    return p;
}

Json pretrained_to_json(const PretrainedModel& model, const KernelConfig& kernel) {
    return {{"kernel", kernel_to_json(kernel)},
            {"objective", to_string(model.objective)},
            {"encoder", params_to_json(model.encoder)},
            {"head", mlp_to_json(model.head)},
            {"loss_curve", model.loss_curve}};
}

std::pair<PretrainedModel, KernelConfig> pretrained_from_json(const Json& j) {
    PretrainedModel m;
    KernelConfig k;
    try {
        k = kernel_from_json(j.at("kernel"), k);
        m.objective = objective_from_string(j.at("objective").get<std::string>());
        m.encoder = params_from_json(j.at("encoder"));
        m.head = mlp_from_json(j.at("head"));
        read_if(j, "loss_curve", m.loss_curve);
    } catch (const Json::exception& e) {
        throw FormatError(std::string("pretrained model: ") + e.what());
    }
    const Index input_dim = m.encoder.feature_map.weight.value.rows();
    m.encoder.check(k, input_dim);
    return {std::move(m), k};
}

std::string hidden_graph_dot(const Matrix& adjacency, double threshold, const std::string& name) {
    std::ostringstream out;
    out << "graph " << name << " {\n";
    for (Index u = 0; u < adjacency.rows(); ++u) out << "  " << u << ";\n";
    for (Index u = 0; u < adjacency.rows(); ++u)
        for (Index v = u + 1; v < adjacency.cols(); ++v)
            if (adjacency(u, v) >= threshold)
                out << "  " << u << " -- " << v << " [weight=" << format_number(adjacency(u, v)) << "];\n";
    out << "}\n";
    return out.str();
}

void export_hidden_graphs(const SwagParams& params, double threshold, const fs::path& dir) {
    Json graphs = Json::array();
    for (std::size_t k = 0; k < params.hidden_graphs.size(); ++k) {
        const Matrix adj = hidden_adjacency(params.hidden_graphs[k]);
        graphs.push_back({{"index", k}, {"adjacency", matrix_to_json(adj)}});
        const std::string name = "hidden_graph_" + std::to_string(k);
        write_text(dir / (name + ".dot"), hidden_graph_dot(adj, threshold, name));
    }
    write_text(dir / "hidden_graphs.json", Json{{"threshold", threshold}, {"graphs", graphs}}.dump(2));
}

std::vector<Matrix> read_hidden_graphs(const fs::path& json_file) {
    const Json j = read_json(json_file);
    std::vector<Matrix> out;
    try {
        for (const Json& g : j.at("graphs")) out.push_back(matrix_from_json(g.at("adjacency")));
    } catch (const Json::exception& e) {
        throw FormatError(std::string("hidden graphs: ") + e.what());
    }
    return out;
}

AugmentManifest augment_dataset(const Dataset& ds, const AugmenterConfig& augmenter, const fs::path& dir,
                                const std::string& name, std::uint64_t epoch) {
    validate(ds);
    const auto aug = make_augmenter(augmenter);
    const auto* lga = dynamic_cast<const LgaAugmenter*>(aug.get());
    AugmentManifest manifest{augmenter, epoch, {}};
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        out.graphs[i] = aug->augment(ds.graphs[i], i, epoch);
        manifest.kept_rank.push_back(lga ? std::optional<Index>(lga->estimate(ds.graphs[i], i).kept_rank)
                                         : std::nullopt);
    }
    write_tu_dataset(out, dir, name);

    Json ranks = Json::array();
    for (const auto& r : manifest.kept_rank) ranks.push_back(r ? Json(*r) : Json(nullptr));
    Json j = {{"dataset", name},
              {"augmenter", to_string(augmenter.kind)},
              {"tau", augmenter.tau},
              {"drop_rate", augmenter.drop_rate},
              {"seed", augmenter.seed},
              {"epoch", epoch},
              {"kept_rank", std::move(ranks)}};
    write_text(dir / "manifest.json", j.dump(2));
    return manifest;
}

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace swag
