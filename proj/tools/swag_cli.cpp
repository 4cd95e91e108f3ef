// Command-line driver for training, pretraining, adaptation, ablations,
// offline augmentation and hidden-graph export.

#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "CLI11.hpp"

#include "swag/harness.hpp"
#include "swag/report.hpp"

namespace fs = std::filesystem;
using namespace swag;

namespace {

using Override = std::function<void(TrainConfig&)>;

struct Common {
    std::string config_file;
    std::string out = "out";
    std::vector<Override> overrides;

    TrainConfig resolve() const {
        TrainConfig cfg = config_file.empty() ? TrainConfig{} : load_config(config_file);
        for (const auto& o : overrides) o(cfg);
        return cfg;
    }
};

template <typename T>
void flag(CLI::App* app, Common& c, const std::string& name, std::function<void(TrainConfig&, const T&)> set,
          const std::string& help) {
    app->add_option_function<T>(name, [&c, set](const T& v) { c.overrides.push_back([set, v](TrainConfig& cfg) { set(cfg, v); }); },
                                help);
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_file, "JSON config; flags override its values")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "Output directory");
    flag<std::string>(app, c, "--dataset", [](TrainConfig& t, const std::string& v) { t.dataset = v; }, "Dataset name");
    flag<std::string>(app, c, "--data-dir", [](TrainConfig& t, const std::string& v) { t.data_dir = v; },
                      "Directory holding the TU text files");
    flag<int>(app, c, "--hidden-graphs", [](TrainConfig& t, const int& v) { t.kernel.num_hidden = v; },
              "Number of hidden graphs M");
    flag<int>(app, c, "--hidden-nodes", [](TrainConfig& t, const int& v) { t.kernel.hidden_nodes = v; },
              "Nodes per hidden graph m");
    flag<int>(app, c, "--hidden-dim", [](TrainConfig& t, const int& v) { t.kernel.hidden_dim = v; },
              "Hidden feature dimension");
    flag<int>(app, c, "--walk-len", [](TrainConfig& t, const int& v) { t.kernel.max_walk = v; }, "Maximum walk length P");
    flag<int>(app, c, "--diff-steps", [](TrainConfig& t, const int& v) { t.kernel.diffusion.depth = v; },
              "Diffusion depth J");
    flag<double>(app, c, "--alpha", [](TrainConfig& t, const double& v) { t.kernel.diffusion.alpha = v; },
                 "Teleport probability");
    flag<double>(app, c, "--tau", [](TrainConfig& t, const double& v) { t.augmenter.tau = v; }, "USVT threshold factor");
    flag<std::string>(app, c, "--augmenter",
                      [](TrainConfig& t, const std::string& v) { t.augmenter.kind = augmenter_from_string(v); },
                      "lga, edge-drop or identity");
    flag<double>(app, c, "--drop-rate", [](TrainConfig& t, const double& v) { t.augmenter.drop_rate = v; },
                 "Edge-drop probability");
    flag<std::string>(app, c, "--objective",
                      [](TrainConfig& t, const std::string& v) { t.objective = objective_from_string(v); },
                      "infonce or simsiam");
    flag<int>(app, c, "--epochs", [](TrainConfig& t, const int& v) { t.epochs = v; }, "Training epochs");
    flag<int>(app, c, "--pretrain-epochs", [](TrainConfig& t, const int& v) { t.pretrain_epochs = v; },
              "Self-supervised epochs");
    flag<double>(app, c, "--lr", [](TrainConfig& t, const double& v) { t.lr = v; }, "Adam learning rate");
    flag<int>(app, c, "--batch-size", [](TrainConfig& t, const int& v) { t.batch_size = v; }, "Batch size");
    flag<int>(app, c, "--folds", [](TrainConfig& t, const int& v) { t.folds = v; }, "Cross-validation folds");
    flag<std::uint64_t>(app, c, "--seed", [](TrainConfig& t, const std::uint64_t& v) { t.seed = v; }, "Run seed");
    app->add_flag_callback("--literal-objective",
                           [&c] { c.overrides.push_back([](TrainConfig& t) { t.literal_objective = true; }); },
                           "Debug: pretrain on the uncorrected objectives");
}

void print_warnings(const TrainConfig& cfg) {
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
}

void print_summary(const RunResult& r) {
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& f : r.folds)
        std::cout << "fold " << f.fold << "  acc " << f.test_accuracy << "  best epoch " << f.best_epoch + 1 << "  "
                  << f.adaptation << "  " << f.seconds << " s\n";
    std::cout << "mean " << r.mean_accuracy << "  std " << r.std_accuracy << "  wall " << r.wall_seconds << " s\n";
}

void write_run(const RunResult& r, const fs::path& out) {
    write_text(out / "result.json", result_to_json(r).dump(2));
    write_text(out / "folds.csv", folds_csv(r));
    std::cout << "wrote " << (out / "result.json").string() << " and folds.csv\n";
}

std::vector<std::size_t> all_indices(const Dataset& ds) {
    std::vector<std::size_t> idx(ds.graphs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph classification with learned hidden graphs"};
    app.require_subcommand(1);

    Common train_opts, pretrain_opts, probe_opts, finetune_opts, ablate_opts, augment_opts, export_opts;
    std::string pretrained_path, param_name = "tau", params_path, report_input;
    std::vector<double> values;
    double threshold = 0.5;
    bool both = false;

    auto* train = app.add_subcommand("train", "Supervised cross-validation");
    add_common(train, train_opts);

    auto* pretrain = app.add_subcommand("pretrain", "Self-supervised pretraining on every graph");
    add_common(pretrain, pretrain_opts);

    auto* probe = app.add_subcommand("probe", "Frozen encoder, trained predictor");
    add_common(probe, probe_opts);
    probe->add_option("--pretrained", pretrained_path, "Model from `pretrain`; pretrains per fold when omitted");
    probe->add_flag("--both", both, "Also fine-tune and keep the better validation result");

    auto* finetune = app.add_subcommand("finetune", "Pretrained encoder trained with the predictor");
    add_common(finetune, finetune_opts);
    finetune->add_option("--pretrained", pretrained_path, "Model from `pretrain`; pretrains per fold when omitted");
    finetune->add_flag("--both", both, "Also probe and keep the better validation result");

    auto* ablate_cmd = app.add_subcommand("ablate", "Sweep tau or the number of hidden graphs");
    add_common(ablate_cmd, ablate_opts);
    ablate_cmd->add_option("--param", param_name, "tau or num-hidden");
    ablate_cmd->add_option("--values", values, "Values to sweep")->required()->delimiter(',');

    auto* augment = app.add_subcommand("augment", "Write one augmented copy of a dataset");
    add_common(augment, augment_opts);

    auto* export_cmd = app.add_subcommand("export-hidden", "Export learned hidden graphs as JSON and DOT");
    add_common(export_cmd, export_opts);
    export_cmd->add_option("--params", params_path, "Model from `pretrain`; fits on the whole dataset when omitted");
    export_cmd->add_option("--threshold", threshold, "Minimum edge weight kept in DOT output");

    auto* report = app.add_subcommand("report", "Summarize a saved result.json");
    report->add_option("--input", report_input, "result.json")->required()->check(CLI::ExistingFile);
    std::string report_out;
    report->add_option("--out", report_out, "Write folds.csv here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            TrainConfig cfg = train_opts.resolve();
            cfg.mode = Mode::Supervised;
            print_warnings(cfg);
            const RunResult r = train_supervised(cfg, load_dataset(cfg));
            print_summary(r);
            write_run(r, train_opts.out);
        } else if (*pretrain) {
            TrainConfig cfg = pretrain_opts.resolve();
            cfg.mode = Mode::Pretrain;
            print_warnings(cfg);
            const Dataset ds = load_dataset(cfg);
            const auto idx = all_indices(ds);
            const PretrainedModel model = pretrain_ssl(cfg, ds, idx, cfg.seed);
            const fs::path out = fs::path(pretrain_opts.out) / "pretrained.json";
            write_text(out, pretrained_to_json(model, cfg.kernel).dump());
            if (!model.loss_curve.empty())
                std::cout << "final loss " << model.loss_curve.back() << "\nwrote " << out.string() << '\n';
        } else if (*probe || *finetune) {
            const Common& opts = *probe ? probe_opts : finetune_opts;
            TrainConfig cfg = opts.resolve();
            cfg.mode = *probe ? Mode::Probe : Mode::Finetune;
            cfg.compare_adaptations = both;
            print_warnings(cfg);
            const Dataset ds = load_dataset(cfg);
            RunResult r;
            if (pretrained_path.empty()) {
                r = run_ssl(cfg, ds);
            } else {
                auto [model, kernel] = pretrained_from_json(read_json(pretrained_path));
                cfg.kernel = kernel;
                r = adapt(&model, cfg, ds);
            }
            print_summary(r);
            write_run(r, opts.out);
        } else if (*ablate_cmd) {
            TrainConfig cfg = ablate_opts.resolve();
            const AblationParameter p = ablation_parameter_from_string(param_name);
            std::vector<std::string> warnings;
            const Dataset ds = load_dataset(cfg);
            const auto results = ablate(cfg, ds, p, values, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
            const fs::path out = ablate_opts.out;
            for (std::size_t i = 0; i < results.size(); ++i) {
                std::cout << to_string(p) << " = " << values[i] << '\n';
                print_summary(results[i]);
                write_text(out / ("result_" + std::to_string(i) + ".json"), result_to_json(results[i]).dump(2));
            }
            write_text(out / "ablation.csv", ablation_csv(p, values, results));
            std::cout << "wrote " << (out / "ablation.csv").string() << '\n';
        } else if (*augment) {
            TrainConfig cfg = augment_opts.resolve();
            cfg.augmenter.seed = cfg.seed;
            print_warnings(cfg);
            const Dataset ds = load_dataset(cfg);
            const auto manifest = augment_dataset(ds, cfg.augmenter, augment_opts.out, cfg.dataset);
            std::cout << "wrote " << manifest.kept_rank.size() << " graphs to " << augment_opts.out << '\n';
        } else if (*export_cmd) {
            TrainConfig cfg = export_opts.resolve();
            SwagParams params;
            if (!params_path.empty()) {
                params = pretrained_from_json(read_json(params_path)).first.encoder;
            } else {
                params = fit_all(cfg, load_dataset(cfg)).encoder;
            }
            export_hidden_graphs(params, threshold, export_opts.out);
            std::cout << "wrote " << params.hidden_graphs.size() << " hidden graphs to " << export_opts.out << '\n';
        } else if (*report) {
            RunResult r = result_from_json(read_json(report_input));
            const double mean = r.mean_accuracy, sd = r.std_accuracy;
            r.recompute_summary();
            print_summary(r);
            if (std::abs(mean - r.mean_accuracy) > 1e-12 || std::abs(sd - r.std_accuracy) > 1e-12)
                std::cerr << "warning: stored mean/std differ from the per-fold values\n";
            if (!report_out.empty()) write_text(fs::path(report_out) / "folds.csv", folds_csv(r));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
