#pragma once

#include <filesystem>
#include <string>

#include "swag/graph.hpp"

namespace swag {

/// Loads a dataset in the TU benchmark text layout:
///
///   <name>_A.txt                 "u, v" per line, 1-based global node ids
///   <name>_graph_indicator.txt   graph id of each node
///   <name>_graph_labels.txt      one integer label per graph
///   <name>_node_labels.txt       optional, one-hot encoded
///   <name>_node_attributes.txt   optional, comma-separated reals, appended verbatim
///
/// Edges are symmetrized and deduplicated; self-loops are dropped. Graph labels
/// are remapped to 0-based indices in ascending order of the raw values. When
/// neither node file exists the features are node degrees.
Dataset load_tu_dataset(const std::filesystem::path& directory, const std::string& name);

/// Writes `ds` back out in the same layout. Features go to _node_attributes.txt;
/// each undirected edge is listed in both directions, sorted by (u, v).
void write_tu_dataset(const Dataset& ds, const std::filesystem::path& directory, const std::string& name);

} // namespace swag
