#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace plato {

struct Triple {
    int head = 0;
    int relation = 0;
    int tail = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

// Heterogeneous knowledge graph: dense node/relation ids interned in
// lexicographic label order, directed (head, relation, tail) triplets, and
// adjacency rebuilt from the triplets. Immutable after construction.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(int node_count, int relation_count, std::vector<Triple> edges,
                   std::vector<std::string> node_labels = {},
                   std::vector<std::string> relation_labels = {});

    int node_count() const { return node_count_; }
    int relation_count() const { return relation_count_; }
    const std::vector<Triple>& edges() const { return edges_; }
    const std::vector<std::string>& node_labels() const { return node_labels_; }
    const std::vector<std::string>& relation_labels() const { return relation_labels_; }

    // Per-node (neighbor, relation) lists as stated in the triplets.
    const std::vector<std::pair<int, int>>& out_adjacency(int node) const;
    const std::vector<std::pair<int, int>>& in_adjacency(int node) const;

    // Deduplicated union of in- and out-neighbors, sorted ascending.
    std::vector<int> undirected_neighbors(int node) const;

private:
    void check_node(int node) const;

    int node_count_ = 0;
    int relation_count_ = 0;
    std::vector<Triple> edges_;
    std::vector<std::string> node_labels_;
    std::vector<std::string> relation_labels_;
    std::vector<std::vector<std::pair<int, int>>> out_adj_;
    std::vector<std::vector<std::pair<int, int>>> in_adj_;
};

// Injective, total map from tabular feature index to KG node id.
struct FeatureMapping {
    std::vector<std::string> feature_names;
    std::vector<int> node_of_feature;

    int feature_count() const { return static_cast<int>(feature_names.size()); }

    // Mapping for a graph whose nodes are the features themselves, in order.
    static FeatureMapping identity(std::vector<std::string> names);
};

struct LoadedKg {
    KnowledgeGraph kg;
    FeatureMapping mapping;
};

// Parses a tab-separated triples file (head<TAB>relation<TAB>tail, '#' comment
// lines ignored) and a feature map file (feature_name<TAB>node_label).
LoadedKg load_kg(const std::string& triples_path, const std::string& feature_map_path);

// Subgraph on feature nodes only, all relations collapsed to a single type,
// nodes re-indexed to feature order.
KnowledgeGraph induce_feature_subgraph(const KnowledgeGraph& kg, const FeatureMapping& fm);

// Keeps a uniformly random ceil(keep_fraction * |E|) subset of edges.
KnowledgeGraph drop_edges(const KnowledgeGraph& kg, double keep_fraction, std::uint64_t seed);

// Undirected feature-graph view in CSR form, consumed by message passing.
struct FeatureGraphCsr {
    int node_count = 0;
    std::vector<int> offsets;    // size node_count + 1
    std::vector<int> neighbors;  // sorted within each node's range

    int degree(int node) const { return offsets[node + 1] - offsets[node]; }
};

FeatureGraphCsr build_feature_csr(const KnowledgeGraph& feature_kg);

}  // namespace plato
