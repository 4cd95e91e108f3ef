#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swag/folds.hpp"
#include "swag/kernel.hpp"
#include "swag/lga.hpp"
#include "swag/mlp.hpp"
#include "swag/ssl.hpp"

namespace swag {

enum class Mode { Supervised, Pretrain, Probe, Finetune };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct TrainConfig {
    std::string dataset;
    std::string data_dir;
    Mode mode = Mode::Supervised;
    KernelConfig kernel;
    double lr = 0.01;
    int batch_size = 64;
    int epochs = 200;
    int pretrain_epochs = 200;
    Objective objective = Objective::InfoNce;
    AugmenterConfig augmenter;
    int folds = 10;
    std::uint64_t seed = 0;
    /// Run both probing and fine-tuning after pretraining and keep whichever
    /// validates better.
    bool compare_adaptations = false;
    /// Debug: pretrain on the uncorrected objectives instead of the losses.
    bool literal_objective = false;

    /// Throws ConfigError on values that cannot work.
    void validate() const;
    /// Human-readable notes for values outside the usual tuning grids.
    std::vector<std::string> warnings() const;
};

struct FoldResult {
    int fold = 0;
    double test_accuracy = 0.0;
    double val_accuracy = 0.0;
    double train_accuracy = 0.0;
    int best_epoch = -1;   // 0-based epoch whose checkpoint is reported
    double seconds = 0.0;
    std::string adaptation;  // "supervised", "probe" or "finetune"
    std::vector<double> loss_curve;
    std::vector<double> pretrain_loss_curve;
    std::vector<double> val_curve;   // validation accuracy after each epoch
    std::vector<double> test_curve;  // test accuracy after each epoch
    std::vector<std::size_t> test_indices;
};

struct RunResult {
    TrainConfig config;
    std::vector<FoldResult> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population standard deviation over folds
    double wall_seconds = 0.0;

    void recompute_summary();
};

struct PretrainedModel {
    SwagParams encoder;
    Mlp head;
    Objective objective = Objective::InfoNce;
    std::vector<double> loss_curve;
};

/// Loads cfg.dataset from cfg.data_dir, accepting either <dir>/<name>_A.txt
/// or <dir>/<name>/<name>_A.txt.
Dataset load_dataset(const TrainConfig& cfg);

/// Mean softmax cross-entropy of `logits` (B x C) against integer labels.
ad::Var cross_entropy(ad::Var logits, std::span<const int> labels);

/// k-fold cross-validation of encoder + predictor trained jointly from scratch.
/// Each fold reports the test accuracy at the epoch of best validation accuracy
/// (earliest on ties).
RunResult train_supervised(const TrainConfig& cfg, const Dataset& ds);

/// Self-supervised pretraining of encoder and head on `indices` (labels unused).
PretrainedModel pretrain_ssl(const TrainConfig& cfg, const Dataset& ds, std::span<const std::size_t> indices,
                             std::uint64_t seed);

/// Encoder initialization shared by supervised training and pretraining.
SwagParams initial_encoder(const TrainConfig& cfg, const Dataset& ds, std::uint64_t seed);

/// Cross-validated adaptation of one pretrained encoder (probe or finetune per
/// cfg.mode). Throws ConfigError when `pretrained` is null.
RunResult adapt(const PretrainedModel* pretrained, const TrainConfig& cfg, const Dataset& ds);

/// Full self-supervised protocol: per fold, pretrain on the fold's training
/// split, then adapt on the same split.
RunResult run_ssl(const TrainConfig& cfg, const Dataset& ds);

/// Dispatches on cfg.mode (Pretrain is not a cross-validated mode).
RunResult run(const TrainConfig& cfg, const Dataset& ds);

enum class AblationParameter { Tau, NumHidden };

std::string to_string(AblationParameter p);
AblationParameter ablation_parameter_from_string(const std::string& s);

/// One full run per value with shared seeds (and therefore shared folds).
/// Tau sweeps run the self-supervised protocol (fine-tuning when cfg.mode is
/// supervised). Values outside the usual ranges are reported in `warnings`.
std::vector<RunResult> ablate(const TrainConfig& cfg, const Dataset& ds, AblationParameter parameter,
                              std::span<const double> values, std::vector<std::string>* warnings = nullptr);

/// Training on every graph without held-out data; used for sanity checks.
struct FitResult {
    double final_train_accuracy = 0.0;
    std::vector<double> loss_curve;
    std::vector<double> pretrain_loss_curve;
    SwagParams encoder;
    Mlp predictor;
};

FitResult fit_all(const TrainConfig& cfg, const Dataset& ds);

/// Fraction of rows whose argmax(predictor(row)) equals the matching label.
double accuracy(const Matrix& encodings, const Mlp& predictor, std::span<const int> labels);

/// Stable digest of all parameter values; used to assert probing leaves the
/// encoder untouched.
std::uint64_t parameter_hash(const SwagParams& params);

} // namespace swag
