#include "swag/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "swag/adam.hpp"
#include "swag/random.hpp"
#include "swag/tu_io.hpp"

namespace swag {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Stream tags under a fold seed.
enum SeedTag : std::uint64_t { kEncoderInit = 1, kPredictorInit = 2, kShuffle = 3, kPretrainShuffle = 4,
                               kAugment = 5, kHeadInit = 6 };

constexpr std::uint64_t kFitAllFold = 0xffffffffULL;

std::uint64_t fold_seed(std::uint64_t seed, std::uint64_t fold) { return derive_seed(seed, {fold}); }

std::vector<int> labels_of(const Dataset& ds, std::span<const std::size_t> indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(*ds.graphs[i].label);
    return out;
}

/// Shuffled batches of `batch_size`; the last partial batch is kept. With
/// `min_size` 2 a trailing singleton is merged into the previous batch.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> indices, int batch_size, Rng& rng,
                                                   std::size_t min_size) {
    std::vector<std::size_t> order(indices.begin(), indices.end());
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    const auto bs = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t end = std::min(order.size(), start + bs);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (batches.size() > 1 && batches.back().size() < min_size) {
        auto tail = std::move(batches.back());
        batches.pop_back();
        batches.back().insert(batches.back().end(), tail.begin(), tail.end());
    }
    return batches;
}

Matrix encode_subset(const std::vector<PreparedGraph>& prepared, std::span<const std::size_t> indices,
                     const SwagParams& params, const KernelConfig& cfg) {
    Matrix out(static_cast<Index>(indices.size()), cfg.output_dim());
    for (std::size_t r = 0; r < indices.size(); ++r)
        out.row(static_cast<Index>(r)) = swag_encode(prepared[indices[r]], params, cfg);
    return out;
}

Matrix gather_rows(const Matrix& all, std::span<const std::size_t> indices) {
    Matrix out(static_cast<Index>(indices.size()), all.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) out.row(static_cast<Index>(r)) = all.row(static_cast<Index>(indices[r]));
    return out;
}

void check_finite(double loss, const char* what, int epoch) {
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << what << ": non-finite loss at epoch " << epoch;
        throw NumericalError(msg.str());
    }
}

struct PredictorRun {
    std::span<const std::size_t> train, val, test;
    bool train_encoder = true;
    bool select_on_validation = true;
    std::uint64_t shuffle_seed = 0;
};

/// Trains predictor (and encoder when requested). With validation selection the
/// reported test accuracy belongs to the earliest epoch of best validation
/// accuracy; otherwise the final epoch is reported.
FoldResult train_predictor(const TrainConfig& cfg, const Dataset& ds, const std::vector<PreparedGraph>& prepared,
                           const PredictorRun& run, SwagParams& encoder, Mlp& predictor) {
    const auto start = Clock::now();
    const KernelConfig& kcfg = cfg.kernel;
    const std::vector<int> train_labels = labels_of(ds, run.train);
    const std::vector<int> val_labels = labels_of(ds, run.val);
    const std::vector<int> test_labels = labels_of(ds, run.test);

    // A frozen encoder makes every encoding a constant.
    Matrix frozen;
    if (!run.train_encoder) frozen = swag_encode(std::span<const PreparedGraph>(prepared), encoder, kcfg);
    auto encodings = [&](std::span<const std::size_t> idx) {
        return run.train_encoder ? encode_subset(prepared, idx, encoder, kcfg) : gather_rows(frozen, idx);
    };

    std::vector<ad::Parameter*> params = predictor.parameters();
    if (run.train_encoder) {
        auto enc = encoder.parameters();
        params.insert(params.end(), enc.begin(), enc.end());
    }
    ad::Adam opt(params, ad::AdamOptions{.lr = cfg.lr});
    Rng rng(run.shuffle_seed);

    FoldResult result;
    result.test_indices.assign(run.test.begin(), run.test.end());
    double best_val = -1.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        const auto batches = make_batches(run.train, cfg.batch_size, rng, 1);
        for (const auto& batch : batches) {
            opt.zero_grad();
            ad::Tape tape;
            ad::Var x;
            if (run.train_encoder) {
                SwagTapeEncoder enc(tape, encoder, kcfg);
                std::vector<const PreparedGraph*> graphs;
                for (auto i : batch) graphs.push_back(&prepared[i]);
                x = enc.encode(graphs);
            } else {
                x = tape.constant(gather_rows(frozen, batch));
            }
            const auto batch_labels = labels_of(ds, batch);
            const ad::Var loss = cross_entropy(predictor.forward(tape, x), batch_labels);
            check_finite(loss.scalar(), "training", epoch);
            tape.backward(loss);
            opt.step();
            epoch_loss += loss.scalar() * static_cast<double>(batch.size());
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(run.train.size()));

        if (!run.select_on_validation) continue;
        const double val = run.val.empty() ? 0.0 : accuracy(encodings(run.val), predictor, val_labels);
        const double test = run.test.empty() ? 0.0 : accuracy(encodings(run.test), predictor, test_labels);
        result.val_curve.push_back(val);
        result.test_curve.push_back(test);
        if (val > best_val) {
            best_val = val;
            result.best_epoch = epoch;
            result.val_accuracy = val;
            result.test_accuracy = test;
            result.train_accuracy = accuracy(encodings(run.train), predictor, train_labels);
        }
    }
    if (!run.select_on_validation) {
        result.best_epoch = cfg.epochs - 1;
        result.train_accuracy = accuracy(encodings(run.train), predictor, train_labels);
        if (!run.val.empty()) result.val_accuracy = accuracy(encodings(run.val), predictor, val_labels);
        if (!run.test.empty()) result.test_accuracy = accuracy(encodings(run.test), predictor, test_labels);
    }
    result.seconds = seconds_since(start);
    return result;
}

Mlp init_predictor(const TrainConfig& cfg, const Dataset& ds, std::uint64_t fseed) {
    Rng rng(derive_seed(fseed, {kPredictorInit}));
    return Mlp(cfg.kernel.output_dim(), kHeadWidth, ds.num_classes, rng);
}

PretrainedModel pretrain_prepared(const TrainConfig& cfg, const Dataset& ds, const std::vector<PreparedGraph>& prepared,
                                  std::span<const std::size_t> indices, std::uint64_t fseed) {
    if (cfg.objective == Objective::InfoNce && indices.size() < 2)
        throw ConfigError("pretraining: the contrastive objective needs at least two graphs");
    if (indices.empty()) throw ConfigError("pretraining: no graphs to train on");
    PretrainedModel model;
    model.objective = cfg.objective;
    model.encoder = initial_encoder(cfg, ds, fseed);
    Rng head_rng(derive_seed(fseed, {kHeadInit}));
    model.head = Mlp(cfg.kernel.output_dim(), kHeadWidth, kHeadWidth, head_rng);

    AugmenterConfig acfg = cfg.augmenter;
    acfg.seed = derive_seed(fseed, {kAugment});
    const auto augmenter = make_augmenter(acfg);

    std::vector<ad::Parameter*> params = model.encoder.parameters();
    for (auto* p : model.head.parameters()) params.push_back(p);
    ad::Adam opt(params, ad::AdamOptions{.lr = cfg.lr});
    Rng rng(derive_seed(fseed, {kPretrainShuffle}));
    const std::size_t min_batch = cfg.objective == Objective::InfoNce ? 2 : 1;

    for (int epoch = 0; epoch < cfg.pretrain_epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (const auto& batch : make_batches(indices, cfg.batch_size, rng, min_batch)) {
            opt.zero_grad();
            ad::Tape tape;
            SwagTapeEncoder enc(tape, model.encoder, cfg.kernel);
            const SslBatch views = make_ssl_batch(enc, ds.graphs, prepared, batch, *augmenter,
                                                  static_cast<std::uint64_t>(epoch), cfg.kernel);
            ad::Var loss;
            if (cfg.objective == Objective::InfoNce)
                loss = cfg.literal_objective ? literal_infonce_loss(views, model.head) : infonce_loss(views, model.head);
            else
                loss = cfg.literal_objective ? literal_noncontrastive_objective(views, model.head)
                                             : noncontrastive_loss(views, model.head);
            check_finite(loss.scalar(), "pretraining", epoch);
            tape.backward(loss);
            opt.step();
            epoch_loss += loss.scalar() * static_cast<double>(batch.size());
        }
        model.loss_curve.push_back(epoch_loss / static_cast<double>(indices.size()));
    }
    return model;
}

/// Probe and/or finetune one pretrained encoder on a split.
FoldResult adapt_fold(const PretrainedModel& pre, const TrainConfig& cfg, const Dataset& ds,
                      const std::vector<PreparedGraph>& prepared, const FoldSplit& split, std::uint64_t fseed) {
    std::vector<Mode> modes;
    if (cfg.compare_adaptations)
        modes = {Mode::Probe, Mode::Finetune};
    else
        modes = {cfg.mode == Mode::Probe ? Mode::Probe : Mode::Finetune};

    std::optional<FoldResult> best;
    for (Mode mode : modes) {
        SwagParams encoder = pre.encoder;
        Mlp predictor = init_predictor(cfg, ds, fseed);
        const std::uint64_t before = parameter_hash(encoder);
        PredictorRun run{split.train_idx, split.val_idx, split.test_idx, mode == Mode::Finetune, true,
                         derive_seed(fseed, {kShuffle})};
        FoldResult r = train_predictor(cfg, ds, prepared, run, encoder, predictor);
        if (mode == Mode::Probe && parameter_hash(encoder) != before)
            throw ContractError("probe: encoder parameters changed during probing");
        r.adaptation = to_string(mode);
        // Ties go to the later (finetune) candidate.
        if (!best || r.val_accuracy >= best->val_accuracy) best = std::move(r);
    }
    best->pretrain_loss_curve = pre.loss_curve;
    return *best;
}

RunResult start_run(const TrainConfig& cfg, const Dataset& ds) {
    cfg.validate();
    validate(ds);
    if (ds.num_classes < 2) throw ConfigError("dataset needs at least two classes");
    RunResult out;
    out.config = cfg;
    return out;
}

} // namespace

SwagParams initial_encoder(const TrainConfig& cfg, const Dataset& ds, std::uint64_t seed) {
    Rng rng(derive_seed(seed, {kEncoderInit}));
    return SwagParams::init(cfg.kernel, ds.feature_dim, rng);
}

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Supervised: return "supervised";
    case Mode::Pretrain: return "pretrain";
    case Mode::Probe: return "probe";
    case Mode::Finetune: return "finetune";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& s) {
    if (s == "supervised") return Mode::Supervised;
    if (s == "pretrain") return Mode::Pretrain;
    if (s == "probe") return Mode::Probe;
    if (s == "finetune") return Mode::Finetune;
    throw ConfigError("unknown mode '" + s + "'");
}

void TrainConfig::validate() const {
    kernel.validate();
    augmenter.validate();
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (pretrain_epochs < 0) throw ConfigError("pretrain epochs must be non-negative");
    if (folds < 2) throw ConfigError("folds must be at least 2");
}

std::vector<std::string> TrainConfig::warnings() const {
    std::vector<std::string> out;
    if (augmenter.kind == AugmenterKind::Lga && (augmenter.tau < 0.3 || augmenter.tau > 4.2)) {
        std::ostringstream msg;
        msg << "tau " << augmenter.tau << " is outside the usual range [0.3, 4.2]";
        out.push_back(msg.str());
    }
    if (kernel.num_hidden < 2 || kernel.num_hidden > 24)
        out.push_back("number of hidden graphs " + std::to_string(kernel.num_hidden) +
                      " is outside the usual range [2, 24]");
    if (kernel.max_walk > 3)
        out.push_back("walk length " + std::to_string(kernel.max_walk) + " is above the usual maximum of 3");
    if (kernel.diffusion.depth > 3)
        out.push_back("diffusion depth " + std::to_string(kernel.diffusion.depth) + " is above the usual maximum of 3");
    return out;
}

void RunResult::recompute_summary() {
    mean_accuracy = std_accuracy = 0.0;
    if (folds.empty()) return;
    const double n = static_cast<double>(folds.size());
    for (const auto& f : folds) mean_accuracy += f.test_accuracy;
    mean_accuracy /= n;
    for (const auto& f : folds) std_accuracy += (f.test_accuracy - mean_accuracy) * (f.test_accuracy - mean_accuracy);
    std_accuracy = std::sqrt(std_accuracy / n);
}

Dataset load_dataset(const TrainConfig& cfg) {
    if (cfg.dataset.empty()) throw ConfigError("no dataset name given");
    namespace fs = std::filesystem;
    const fs::path dir = cfg.data_dir.empty() ? fs::path(".") : fs::path(cfg.data_dir);
    if (fs::exists(dir / (cfg.dataset + "_A.txt"))) return load_tu_dataset(dir, cfg.dataset);
    return load_tu_dataset(dir / cfg.dataset, cfg.dataset);
}

ad::Var cross_entropy(ad::Var logits, std::span<const int> labels) {
    const Index b = logits.rows();
    if (b == 0 || static_cast<std::size_t>(b) != labels.size())
        throw ContractError("cross_entropy: label count must match the logit rows");
    Matrix onehot = Matrix::Zero(b, logits.cols());
    for (Index i = 0; i < b; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= logits.cols()) throw ContractError("cross_entropy: label out of range");
        onehot(i, y) = 1.0;
    }
    ad::Tape& tape = *logits.tape();
    const ad::Var picked = ad::cwise_product(ad::row_log_softmax(logits), tape.constant(std::move(onehot)));
    return ad::scale(ad::sum(picked), -1.0 / static_cast<double>(b));
}

double accuracy(const Matrix& encodings, const Mlp& predictor, std::span<const int> labels) {
    if (static_cast<std::size_t>(encodings.rows()) != labels.size())
        throw ContractError("accuracy: label count must match the encoding rows");
    if (labels.empty()) return 0.0;
    const Matrix logits = predictor.forward(encodings);
    std::size_t correct = 0;
    for (Index i = 0; i < logits.rows(); ++i) {
        Index arg = 0;
        logits.row(i).maxCoeff(&arg);
        if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::uint64_t parameter_hash(const SwagParams& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const unsigned char* bytes, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) h = (h ^ bytes[i]) * 0x100000001b3ULL;
    };
    for (const ad::Parameter* p : params.parameters()) {
        const Index dims[2] = {p->value.rows(), p->value.cols()};
        feed(reinterpret_cast<const unsigned char*>(dims), sizeof dims);
        feed(reinterpret_cast<const unsigned char*>(p->value.data()),
             static_cast<std::size_t>(p->value.size()) * sizeof(double));
    }
    return h;
}

RunResult train_supervised(const TrainConfig& cfg, const Dataset& ds) {
    const auto start = Clock::now();
    RunResult out = start_run(cfg, ds);
    const auto splits = stratified_folds(ds, cfg.folds, cfg.seed);
    const auto prepared = prepare(std::span<const Graph>(ds.graphs), cfg.kernel);
    for (std::size_t f = 0; f < splits.size(); ++f) {
        const std::uint64_t fseed = fold_seed(cfg.seed, f);
        SwagParams encoder = initial_encoder(cfg, ds, fseed);
        Mlp predictor = init_predictor(cfg, ds, fseed);
        PredictorRun run{splits[f].train_idx, splits[f].val_idx, splits[f].test_idx, true, true,
                         derive_seed(fseed, {kShuffle})};
        FoldResult r = train_predictor(cfg, ds, prepared, run, encoder, predictor);
        r.fold = static_cast<int>(f);
        r.adaptation = "supervised";
        out.folds.push_back(std::move(r));
    }
    out.recompute_summary();
    out.wall_seconds = seconds_since(start);
    return out;
}

PretrainedModel pretrain_ssl(const TrainConfig& cfg, const Dataset& ds, std::span<const std::size_t> indices,
                             std::uint64_t seed) {
    cfg.validate();
    validate(ds);
    for (auto i : indices)
        if (i >= ds.graphs.size()) throw ContractError("pretrain_ssl: graph index out of range");
    const auto prepared = prepare(std::span<const Graph>(ds.graphs), cfg.kernel);
    return pretrain_prepared(cfg, ds, prepared, indices, seed);
}

RunResult adapt(const PretrainedModel* pretrained, const TrainConfig& cfg, const Dataset& ds) {
    if (pretrained == nullptr) throw ConfigError("adaptation needs a pretrained encoder");
    const auto start = Clock::now();
    RunResult out = start_run(cfg, ds);
    pretrained->encoder.check(cfg.kernel, ds.feature_dim);
    const auto splits = stratified_folds(ds, cfg.folds, cfg.seed);
    const auto prepared = prepare(std::span<const Graph>(ds.graphs), cfg.kernel);
    for (std::size_t f = 0; f < splits.size(); ++f) {
        FoldResult r = adapt_fold(*pretrained, cfg, ds, prepared, splits[f], fold_seed(cfg.seed, f));
        r.fold = static_cast<int>(f);
        out.folds.push_back(std::move(r));
    }
    out.recompute_summary();
    out.wall_seconds = seconds_since(start);
    return out;
}

RunResult run_ssl(const TrainConfig& cfg, const Dataset& ds) {
    const auto start = Clock::now();
    RunResult out = start_run(cfg, ds);
    const auto splits = stratified_folds(ds, cfg.folds, cfg.seed);
    const auto prepared = prepare(std::span<const Graph>(ds.graphs), cfg.kernel);
    for (std::size_t f = 0; f < splits.size(); ++f) {
        const std::uint64_t fseed = fold_seed(cfg.seed, f);
        const PretrainedModel pre = pretrain_prepared(cfg, ds, prepared, splits[f].train_idx, fseed);
        FoldResult r = adapt_fold(pre, cfg, ds, prepared, splits[f], fseed);
        r.fold = static_cast<int>(f);
        out.folds.push_back(std::move(r));
    }
    out.recompute_summary();
    out.wall_seconds = seconds_since(start);
    return out;
}

RunResult run(const TrainConfig& cfg, const Dataset& ds) {
    switch (cfg.mode) {
    case Mode::Supervised: return train_supervised(cfg, ds);
    case Mode::Probe:
    case Mode::Finetune: return run_ssl(cfg, ds);
    case Mode::Pretrain: break;
    }
    throw ConfigError("pretrain mode produces a model, not a cross-validated result");
}

std::string to_string(AblationParameter p) { return p == AblationParameter::Tau ? "tau" : "num-hidden"; }

AblationParameter ablation_parameter_from_string(const std::string& s) {
    if (s == "tau") return AblationParameter::Tau;
    if (s == "num-hidden" || s == "hidden-graphs") return AblationParameter::NumHidden;
    throw ConfigError("unknown ablation parameter '" + s + "' (expected tau or num-hidden)");
}

std::vector<RunResult> ablate(const TrainConfig& cfg, const Dataset& ds, AblationParameter parameter,
                              std::span<const double> values, std::vector<std::string>* warnings) {
    if (values.empty()) throw ConfigError("ablation needs at least one value");
    std::vector<RunResult> out;
    for (double v : values) {
        TrainConfig c = cfg;
        if (parameter == AblationParameter::Tau) {
            c.augmenter.kind = AugmenterKind::Lga;
            c.augmenter.tau = v;
            if (c.mode == Mode::Supervised || c.mode == Mode::Pretrain) c.mode = Mode::Finetune;
        } else {
            if (v != std::floor(v) || v < 1.0) throw ConfigError("number of hidden graphs must be a positive integer");
            c.kernel.num_hidden = static_cast<int>(v);
        }
        if (warnings)
            for (auto& w : c.warnings()) warnings->push_back(std::move(w));
        out.push_back(run(c, ds));
    }
    return out;
}

FitResult fit_all(const TrainConfig& cfg, const Dataset& ds) {
    cfg.validate();
    validate(ds);
    std::vector<std::size_t> all(ds.graphs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto prepared = prepare(std::span<const Graph>(ds.graphs), cfg.kernel);
    const std::uint64_t fseed = fold_seed(cfg.seed, kFitAllFold);

    FitResult out;
    bool train_encoder = true;
    if (cfg.mode == Mode::Supervised) {
        out.encoder = initial_encoder(cfg, ds, fseed);
    } else {
        PretrainedModel pre = pretrain_prepared(cfg, ds, prepared, all, fseed);
        out.encoder = std::move(pre.encoder);
        out.pretrain_loss_curve = std::move(pre.loss_curve);
        train_encoder = cfg.mode != Mode::Probe;
    }
    out.predictor = init_predictor(cfg, ds, fseed);
    PredictorRun run{all, {}, {}, train_encoder, false, derive_seed(fseed, {kShuffle})};
    FoldResult r = train_predictor(cfg, ds, prepared, run, out.encoder, out.predictor);
    out.final_train_accuracy = r.train_accuracy;
    out.loss_curve = std::move(r.loss_curve);
    return out;
}

} // namespace swag
