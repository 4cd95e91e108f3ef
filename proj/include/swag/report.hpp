#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "swag/harness.hpp"

namespace swag {

using Json = nlohmann::json;

// Config files mirror TrainConfig field names; nested objects for `kernel`
// (with `diffusion`) and `augmenter`. Keys missing from the file keep the
// value in `base`.
Json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const Json& j, TrainConfig base = {});
TrainConfig load_config(const std::filesystem::path& path);

Json result_to_json(const RunResult& r);
RunResult result_from_json(const Json& j);

/// One row per fold: fold, accuracy, epochs-to-best, seconds.
std::string folds_csv(const RunResult& r);
/// One row per swept value: value, mean, std.
std::string ablation_csv(AblationParameter parameter, std::span<const double> values,
                         std::span<const RunResult> results);

Json params_to_json(const SwagParams& params);
SwagParams params_from_json(const Json& j);

Json pretrained_to_json(const PretrainedModel& model, const KernelConfig& kernel);
/// Returns the model and the kernel config it was trained with.
std::pair<PretrainedModel, KernelConfig> pretrained_from_json(const Json& j);

/// Writes hidden_graphs.json (every effective adjacency in full) and one
/// hidden_graph_<k>.dot per hidden graph keeping the edges with weight >=
/// threshold. Throws IoError when the directory cannot be written.
void export_hidden_graphs(const SwagParams& params, double threshold, const std::filesystem::path& dir);
std::vector<Matrix> read_hidden_graphs(const std::filesystem::path& json_file);
/// DOT text for one weighted adjacency.
std::string hidden_graph_dot(const Matrix& adjacency, double threshold, const std::string& name);

struct AugmentManifest {
    AugmenterConfig augmenter;
    std::uint64_t epoch = 0;
    std::vector<std::optional<Index>> kept_rank;  // per graph, LGA only
};

/// Augments every graph once (epoch key `epoch`) and writes the result in TU
/// text layout under `dir` together with manifest.json.
AugmentManifest augment_dataset(const Dataset& ds, const AugmenterConfig& augmenter, const std::filesystem::path& dir,
                                const std::string& name, std::uint64_t epoch = 0);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

} // namespace swag
