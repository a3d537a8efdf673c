#include "plato/kg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "plato/errors.hpp"
#include "plato/rng.hpp"

namespace plato {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(int node_count, int relation_count, std::vector<Triple> edges,
                               std::vector<std::string> node_labels,
                               std::vector<std::string> relation_labels)
    : node_count_(node_count),
      relation_count_(relation_count),
      edges_(std::move(edges)),
      node_labels_(std::move(node_labels)),
      relation_labels_(std::move(relation_labels)) {
    out_adj_.resize(node_count_);
    in_adj_.resize(node_count_);
    for (const auto& e : edges_) {
        if (e.head < 0 || e.head >= node_count_ || e.tail < 0 || e.tail >= node_count_) {
            throw ValidationError("edge endpoint out of range");
        }
        if (e.relation < 0 || e.relation >= relation_count_) {
            throw ValidationError("edge relation out of range");
        }
        out_adj_[e.head].emplace_back(e.tail, e.relation);
        in_adj_[e.tail].emplace_back(e.head, e.relation);
    }
    for (auto& adj : out_adj_) {
        std::sort(adj.begin(), adj.end());
    }
    for (auto& adj : in_adj_) {
        std::sort(adj.begin(), adj.end());
    }
}

void KnowledgeGraph::check_node(int node) const {
    if (node < 0 || node >= node_count_) {
        throw ValidationError("node id " + std::to_string(node) + " out of range [0, " +
                              std::to_string(node_count_) + ")");
    }
}

const std::vector<std::pair<int, int>>& KnowledgeGraph::out_adjacency(int node) const {
    check_node(node);
    return out_adj_[node];
}

const std::vector<std::pair<int, int>>& KnowledgeGraph::in_adjacency(int node) const {
    check_node(node);
    return in_adj_[node];
}

std::vector<int> KnowledgeGraph::undirected_neighbors(int node) const {
    check_node(node);
    std::vector<int> result;
    result.reserve(out_adj_[node].size() + in_adj_[node].size());
    for (const auto& [nbr, rel] : out_adj_[node]) {
        result.push_back(nbr);
    }
    for (const auto& [nbr, rel] : in_adj_[node]) {
        result.push_back(nbr);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

FeatureMapping FeatureMapping::identity(std::vector<std::string> names) {
    FeatureMapping fm;
    fm.node_of_feature.resize(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        fm.node_of_feature[j] = static_cast<int>(j);
    }
    fm.feature_names = std::move(names);
    return fm;
}

LoadedKg load_kg(const std::string& triples_path, const std::string& feature_map_path) {
    std::ifstream triples_in(triples_path);
    if (!triples_in) {
        throw ValidationError("cannot open triples file: " + triples_path);
    }

    struct RawTriple {
        std::string head, relation, tail;
    };
    std::vector<RawTriple> raw;
    std::set<std::string> node_label_set;
    std::set<std::string> relation_label_set;

    std::string line;
    int line_no = 0;
    while (std::getline(triples_in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw ParseError(triples_path + ":" + std::to_string(line_no) +
                             ": expected 3 tab-separated fields");
        }
        if (fields[0] == fields[2]) {
            throw ParseError(triples_path + ":" + std::to_string(line_no) +
                             ": self-loop not allowed");
        }
        node_label_set.insert(fields[0]);
        node_label_set.insert(fields[2]);
        relation_label_set.insert(fields[1]);
        raw.push_back({fields[0], fields[1], fields[2]});
    }
    if (raw.empty()) {
        throw ValidationError(triples_path + ": graph must have at least one edge");
    }

    // Intern in lexicographic label order (std::set iterates sorted).
    std::vector<std::string> node_labels(node_label_set.begin(), node_label_set.end());
    std::vector<std::string> relation_labels(relation_label_set.begin(), relation_label_set.end());
    std::map<std::string, int> node_id, relation_id;
    for (std::size_t i = 0; i < node_labels.size(); ++i) {
        node_id[node_labels[i]] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < relation_labels.size(); ++i) {
        relation_id[relation_labels[i]] = static_cast<int>(i);
    }

    std::vector<Triple> edges;
    edges.reserve(raw.size());
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& t : raw) {
        Triple e{node_id[t.head], relation_id[t.relation], node_id[t.tail]};
        if (!seen.insert({e.head, e.relation, e.tail}).second) {
            throw ParseError(triples_path + ": duplicate triplet " + t.head + " " + t.relation +
                             " " + t.tail);
        }
        edges.push_back(e);
    }

    KnowledgeGraph kg(static_cast<int>(node_labels.size()),
                      static_cast<int>(relation_labels.size()), std::move(edges),
                      std::move(node_labels), std::move(relation_labels));

    std::ifstream fm_in(feature_map_path);
    if (!fm_in) {
        throw ValidationError("cannot open feature map file: " + feature_map_path);
    }
    FeatureMapping fm;
    std::set<std::string> feature_seen;
    std::set<int> node_seen;
    line_no = 0;
    while (std::getline(fm_in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw ParseError(feature_map_path + ":" + std::to_string(line_no) +
                             ": expected feature_name<TAB>node_label");
        }
        if (!feature_seen.insert(fields[0]).second) {
            throw ValidationError(feature_map_path + ":" + std::to_string(line_no) +
                                  ": duplicate feature name '" + fields[0] + "'");
        }
        auto it = node_id.find(fields[1]);
        if (it == node_id.end()) {
            throw ValidationError(feature_map_path + ":" + std::to_string(line_no) + ": node '" +
                                  fields[1] + "' not present in the knowledge graph");
        }
        if (!node_seen.insert(it->second).second) {
            throw ValidationError(feature_map_path + ":" + std::to_string(line_no) + ": node '" +
                                  fields[1] + "' mapped by more than one feature");
        }
        fm.feature_names.push_back(fields[0]);
        fm.node_of_feature.push_back(it->second);
    }
    if (fm.feature_names.empty()) {
        throw ValidationError(feature_map_path + ": feature map is empty");
    }

    return {std::move(kg), std::move(fm)};
}

KnowledgeGraph induce_feature_subgraph(const KnowledgeGraph& kg, const FeatureMapping& fm) {
    const int d = fm.feature_count();
    std::vector<int> feature_of_node(kg.node_count(), -1);
    for (int j = 0; j < d; ++j) {
        const int node = fm.node_of_feature[j];
        if (node < 0 || node >= kg.node_count()) {
            throw ValidationError("feature mapping references node out of range");
        }
        feature_of_node[node] = j;
    }

    std::set<std::pair<int, int>> seen;
    std::vector<Triple> edges;
    for (const auto& e : kg.edges()) {
        const int fj = feature_of_node[e.head];
        const int fk = feature_of_node[e.tail];
        if (fj < 0 || fk < 0) {
            continue;
        }
        if (seen.insert({fj, fk}).second) {
            edges.push_back({fj, 0, fk});
        }
    }

    return KnowledgeGraph(d, 1, std::move(edges), fm.feature_names, {"edge"});
}

KnowledgeGraph drop_edges(const KnowledgeGraph& kg, double keep_fraction, std::uint64_t seed) {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
        throw ConfigError("keep_fraction must be in (0, 1]");
    }
    const auto total = kg.edges().size();
    const auto keep = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(total)));

    std::vector<std::size_t> indices(total);
    for (std::size_t i = 0; i < total; ++i) {
        indices[i] = i;
    }
    Rng rng(derive_seed(seed, {0x6472u /* "dr" */}));
    rng.shuffle(indices);
    indices.resize(keep);
    std::sort(indices.begin(), indices.end());

    std::vector<Triple> edges;
    edges.reserve(keep);
    for (auto i : indices) {
        edges.push_back(kg.edges()[i]);
    }
    return KnowledgeGraph(kg.node_count(), kg.relation_count(), std::move(edges),
                          kg.node_labels(), kg.relation_labels());
}

FeatureGraphCsr build_feature_csr(const KnowledgeGraph& feature_kg) {
    FeatureGraphCsr csr;
    csr.node_count = feature_kg.node_count();
    csr.offsets.assign(csr.node_count + 1, 0);

    std::vector<std::vector<int>> nbrs(csr.node_count);
    for (int v = 0; v < csr.node_count; ++v) {
        nbrs[v] = feature_kg.undirected_neighbors(v);
    }
    for (int v = 0; v < csr.node_count; ++v) {
        csr.offsets[v + 1] = csr.offsets[v] + static_cast<int>(nbrs[v].size());
    }
    csr.neighbors.reserve(csr.offsets.back());
    for (int v = 0; v < csr.node_count; ++v) {
        csr.neighbors.insert(csr.neighbors.end(), nbrs[v].begin(), nbrs[v].end());
    }
    return csr;
}

}  // namespace plato
