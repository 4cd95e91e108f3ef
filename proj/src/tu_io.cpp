#include "swag/tu_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace swag {

namespace fs = std::filesystem;

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<Line> read_lines(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw LoadError("cannot open dataset file: " + file.string());
    std::vector<Line> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string t = trim(raw);
        if (!t.empty()) lines.push_back({number, std::move(t)});
    }
    return lines;
}

[[noreturn]] void format_error(const fs::path& file, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << file.filename().string() << ":" << line << ": " << what;
    throw FormatError(msg.str());
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(text);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    return fields;
}

long parse_long(const std::string& s, const fs::path& file, std::size_t line) {
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) format_error(file, line, "expected integer, got '" + s + "'");
    return value;
}

double parse_double(const std::string& s, const fs::path& file, std::size_t line) {
    double value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) format_error(file, line, "expected real, got '" + s + "'");
    return value;
}

fs::path file_for(const fs::path& dir, const std::string& name, const char* suffix) {
    return dir / (name + suffix);
}

} // namespace

Dataset load_tu_dataset(const fs::path& directory, const std::string& name) {
    const fs::path edge_file = file_for(directory, name, "_A.txt");
    const fs::path indicator_file = file_for(directory, name, "_graph_indicator.txt");
    const fs::path label_file = file_for(directory, name, "_graph_labels.txt");
    const fs::path node_label_file = file_for(directory, name, "_node_labels.txt");
    const fs::path attribute_file = file_for(directory, name, "_node_attributes.txt");

    for (const auto& f : {edge_file, indicator_file, label_file})
        if (!fs::exists(f)) throw LoadError("missing dataset file: " + f.string());

    const auto indicator_lines = read_lines(indicator_file);
    if (indicator_lines.empty()) throw LoadError("empty graph indicator file: " + indicator_file.string());

    std::vector<long> indicator;
    indicator.reserve(indicator_lines.size());
    for (const auto& l : indicator_lines) indicator.push_back(parse_long(l.text, indicator_file, l.number));

    std::map<long, std::size_t> graph_of_id;
    for (long id : indicator) graph_of_id.emplace(id, 0);
    {
        std::size_t k = 0;
        for (auto& [id, slot] : graph_of_id) slot = k++;
    }
    const std::size_t num_graphs = graph_of_id.size();
    const std::size_t num_nodes = indicator.size();

    std::vector<std::size_t> node_graph(num_nodes);
    std::vector<Index> node_local(num_nodes);
    std::vector<Index> graph_size(num_graphs, 0);
    for (std::size_t v = 0; v < num_nodes; ++v) {
        node_graph[v] = graph_of_id.at(indicator[v]);
        node_local[v] = graph_size[node_graph[v]]++;
    }

    Dataset ds;
    ds.name = name;
    ds.graphs.resize(num_graphs);
    for (std::size_t k = 0; k < num_graphs; ++k)
        ds.graphs[k].adjacency = Matrix::Zero(graph_size[k], graph_size[k]);

    for (const auto& l : read_lines(edge_file)) {
        const auto fields = split_commas(l.text);
        if (fields.size() != 2) format_error(edge_file, l.number, "expected 'u, v'");
        const long u = parse_long(fields[0], edge_file, l.number);
        const long v = parse_long(fields[1], edge_file, l.number);
        if (u < 1 || v < 1 || static_cast<std::size_t>(u) > num_nodes || static_cast<std::size_t>(v) > num_nodes)
            format_error(edge_file, l.number, "edge endpoint outside node range");
        const std::size_t gu = node_graph[u - 1];
        if (gu != node_graph[v - 1]) format_error(edge_file, l.number, "edge endpoints belong to different graphs");
        if (u == v) continue;
        auto& adj = ds.graphs[gu].adjacency;
        adj(node_local[u - 1], node_local[v - 1]) = 1.0;
        adj(node_local[v - 1], node_local[u - 1]) = 1.0;
    }

    const auto label_lines = read_lines(label_file);
    if (label_lines.size() != num_graphs) {
        std::ostringstream msg;
        msg << label_file.filename().string() << ": expected " << num_graphs << " labels, found " << label_lines.size();
        throw FormatError(msg.str());
    }
    std::vector<long> raw_labels;
    for (const auto& l : label_lines) raw_labels.push_back(parse_long(l.text, label_file, l.number));
    const std::set<long> distinct_labels(raw_labels.begin(), raw_labels.end());
    std::map<long, int> label_index;
    for (long lab : distinct_labels) label_index.emplace(lab, static_cast<int>(label_index.size()));
    for (std::size_t k = 0; k < num_graphs; ++k) ds.graphs[k].label = label_index.at(raw_labels[k]);
    ds.num_classes = static_cast<int>(distinct_labels.size());

    // Node features: one-hot node labels, then raw attributes.
    std::vector<Matrix> blocks;
    if (fs::exists(node_label_file)) {
        const auto lines = read_lines(node_label_file);
        if (lines.size() != num_nodes) format_error(node_label_file, lines.size(), "node label count does not match node count");
        std::vector<long> values;
        for (const auto& l : lines) values.push_back(parse_long(split_commas(l.text).front(), node_label_file, l.number));
        const std::set<long> distinct(values.begin(), values.end());
        std::map<long, Index> column;
        for (long val : distinct) column.emplace(val, static_cast<Index>(column.size()));
        Matrix onehot = Matrix::Zero(static_cast<Index>(num_nodes), static_cast<Index>(distinct.size()));
        for (std::size_t v = 0; v < num_nodes; ++v) onehot(static_cast<Index>(v), column.at(values[v])) = 1.0;
        blocks.push_back(std::move(onehot));
    }
    if (fs::exists(attribute_file)) {
        const auto lines = read_lines(attribute_file);
        if (lines.size() != num_nodes) format_error(attribute_file, lines.size(), "attribute count does not match node count");
        Matrix attrs;
        for (std::size_t v = 0; v < num_nodes; ++v) {
            const auto fields = split_commas(lines[v].text);
            if (v == 0) attrs.resize(static_cast<Index>(num_nodes), static_cast<Index>(fields.size()));
            if (static_cast<Index>(fields.size()) != attrs.cols())
                format_error(attribute_file, lines[v].number, "inconsistent attribute width");
            for (std::size_t c = 0; c < fields.size(); ++c)
                attrs(static_cast<Index>(v), static_cast<Index>(c)) = parse_double(fields[c], attribute_file, lines[v].number);
        }
        blocks.push_back(std::move(attrs));
    }

    if (blocks.empty()) {
        for (auto& g : ds.graphs) g.features = degree_features(g);
        ds.feature_dim = 1;
    } else {
        Index width = 0;
        for (const auto& b : blocks) width += b.cols();
        std::vector<Index> offset(num_graphs, 0);
        for (std::size_t k = 0; k < num_graphs; ++k) ds.graphs[k].features.resize(graph_size[k], width);
        for (std::size_t v = 0; v < num_nodes; ++v) {
            Index col = 0;
            for (const auto& b : blocks) {
                ds.graphs[node_graph[v]].features.row(node_local[v]).segment(col, b.cols()) = b.row(static_cast<Index>(v));
                col += b.cols();
            }
        }
        ds.feature_dim = width;
    }
    return ds;
}

void write_tu_dataset(const Dataset& ds, const fs::path& directory, const std::string& name) {
    std::error_code ec;
    fs::create_directories(directory, ec);
    auto open = [&](const char* suffix) {
        const fs::path p = file_for(directory, name, suffix);
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p.string());
        out.precision(17);
        return out;
    };
    auto edges = open("_A.txt");
    auto indicator = open("_graph_indicator.txt");
    auto labels = open("_graph_labels.txt");
    auto attributes = open("_node_attributes.txt");

    Index base = 0;
    for (std::size_t k = 0; k < ds.graphs.size(); ++k) {
        const Graph& g = ds.graphs[k];
        const Index n = g.num_nodes();
        for (Index u = 0; u < n; ++u)
            for (Index v = 0; v < n; ++v)
                if (g.adjacency(u, v) != 0.0) edges << base + u + 1 << ", " << base + v + 1 << '\n';
        for (Index u = 0; u < n; ++u) {
            indicator << k + 1 << '\n';
            for (Index c = 0; c < g.feature_dim(); ++c) attributes << (c ? ", " : "") << g.features(u, c);
            attributes << '\n';
        }
        labels << g.label.value_or(0) << '\n';
        base += n;
    }
    if (!edges || !indicator || !labels || !attributes) throw IoError("write failed in " + directory.string());
}

} // namespace swag
