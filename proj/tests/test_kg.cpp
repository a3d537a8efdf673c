#include "doctest.h"

#include <algorithm>
#include <set>

#include "plato/errors.hpp"
#include "plato/kg.hpp"
#include "plato/rng.hpp"
#include "test_util.hpp"

using namespace plato;
using plato::testing::TempDir;
using plato::testing::write_file;

namespace {

KnowledgeGraph random_kg(Rng& rng, int nodes, int relations, int n_edges) {
    std::set<std::tuple<int, int, int>> seen;
    std::vector<Triple> edges;
    while (static_cast<int>(edges.size()) < n_edges) {
        const int h = static_cast<int>(rng.uniform_int(0, nodes - 1));
        const int t = static_cast<int>(rng.uniform_int(0, nodes - 1));
        if (h == t) {
            continue;
        }
        const int r = static_cast<int>(rng.uniform_int(0, relations - 1));
        if (seen.insert({h, r, t}).second) {
            edges.push_back({h, r, t});
        }
    }
    return KnowledgeGraph(nodes, relations, std::move(edges));
}

}  // namespace

TEST_CASE("load_kg parses a 3-line file into 3 nodes, 2 relations, 3 edges") {
    TempDir dir("load_basic");
    write_file(dir.file("triples.tsv"), "A\tr1\tB\nB\tr1\tC\nA\tr2\tC\n");
    write_file(dir.file("fm.tsv"), "feat_a\tA\nfeat_b\tB\n");

    const auto loaded = load_kg(dir.file("triples.tsv"), dir.file("fm.tsv"));
    CHECK(loaded.kg.node_count() == 3);
    CHECK(loaded.kg.relation_count() == 2);
    CHECK(loaded.kg.edges().size() == 3);
    // lexicographic interning: A=0, B=1, C=2; r1=0, r2=1
    CHECK(loaded.kg.node_labels() == std::vector<std::string>{"A", "B", "C"});
    CHECK(loaded.kg.edges()[0] == Triple{0, 0, 1});
    CHECK(loaded.mapping.feature_names == std::vector<std::string>{"feat_a", "feat_b"});
    CHECK(loaded.mapping.node_of_feature == std::vector<int>{0, 1});
}

TEST_CASE("load_kg rejects degenerate input") {
    TempDir dir("load_errors");
    write_file(dir.file("fm.tsv"), "f\tA\n");

    SUBCASE("empty triples file") {
        write_file(dir.file("triples.tsv"), "# only a comment\n");
        CHECK_THROWS_AS(load_kg(dir.file("triples.tsv"), dir.file("fm.tsv")), ValidationError);
    }
    SUBCASE("wrong column count names the line") {
        write_file(dir.file("triples.tsv"), "A\tr1\tB\nB\tr1\n");
        CHECK_THROWS_WITH_AS(load_kg(dir.file("triples.tsv"), dir.file("fm.tsv")),
                             doctest::Contains(":2"), ParseError);
    }
    SUBCASE("feature mapping to unknown node") {
        write_file(dir.file("triples.tsv"), "A\tr1\tB\n");
        write_file(dir.file("fm2.tsv"), "f\tZ\n");
        CHECK_THROWS_WITH_AS(load_kg(dir.file("triples.tsv"), dir.file("fm2.tsv")),
                             doctest::Contains("Z"), ValidationError);
    }
    SUBCASE("duplicate feature name") {
        write_file(dir.file("triples.tsv"), "A\tr1\tB\n");
        write_file(dir.file("fm3.tsv"), "f\tA\nf\tB\n");
        CHECK_THROWS_AS(load_kg(dir.file("triples.tsv"), dir.file("fm3.tsv")), ValidationError);
    }
    SUBCASE("two features on one node break injectivity") {
        write_file(dir.file("triples.tsv"), "A\tr1\tB\n");
        write_file(dir.file("fm4.tsv"), "f\tA\ng\tA\n");
        CHECK_THROWS_AS(load_kg(dir.file("triples.tsv"), dir.file("fm4.tsv")), ValidationError);
    }
    SUBCASE("self-loop rejected") {
        write_file(dir.file("triples.tsv"), "A\tr1\tA\n");
        CHECK_THROWS_AS(load_kg(dir.file("triples.tsv"), dir.file("fm.tsv")), ParseError);
    }
    SUBCASE("duplicate triplet rejected") {
        write_file(dir.file("triples.tsv"), "A\tr1\tB\nA\tr1\tB\n");
        CHECK_THROWS_AS(load_kg(dir.file("triples.tsv"), dir.file("fm.tsv")), ParseError);
    }
}

TEST_CASE("load_kg is deterministic") {
    TempDir dir("load_det");
    write_file(dir.file("triples.tsv"), "B\tr2\tC\nA\tr1\tB\nC\tr1\tA\n");
    write_file(dir.file("fm.tsv"), "f1\tC\nf2\tA\n");
    const auto a = load_kg(dir.file("triples.tsv"), dir.file("fm.tsv"));
    const auto b = load_kg(dir.file("triples.tsv"), dir.file("fm.tsv"));
    CHECK(a.kg.edges() == b.kg.edges());
    CHECK(a.kg.node_labels() == b.kg.node_labels());
    CHECK(a.mapping.node_of_feature == b.mapping.node_of_feature);
    for (int v = 0; v < a.kg.node_count(); ++v) {
        CHECK(a.kg.out_adjacency(v) == b.kg.out_adjacency(v));
        CHECK(a.kg.in_adjacency(v) == b.kg.in_adjacency(v));
    }
}

TEST_CASE("undirected_neighbors merges directions and deduplicates") {
    // edges {A->B, C->A}: neighbors(A) = {B, C}
    const auto kg = testing::make_kg(3, 2, {{0, 0, 1}, {2, 0, 0}});
    CHECK(kg.undirected_neighbors(0) == std::vector<int>{1, 2});

    SUBCASE("isolated node has no neighbors") {
        const auto kg2 = testing::make_kg(3, 1, {{0, 0, 1}});
        CHECK(kg2.undirected_neighbors(2).empty());
    }
    SUBCASE("parallel edges under two relations appear once") {
        const auto kg3 = testing::make_kg(2, 2, {{0, 0, 1}, {0, 1, 1}});
        CHECK(kg3.undirected_neighbors(0) == std::vector<int>{1});
    }
    SUBCASE("out-of-range node throws") {
        CHECK_THROWS_AS(kg.undirected_neighbors(7), ValidationError);
    }
}

TEST_CASE("undirected_neighbors is symmetric on random graphs") {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const auto kg = random_kg(rng, 12, 3, 25);
        for (int a = 0; a < kg.node_count(); ++a) {
            for (int b : kg.undirected_neighbors(a)) {
                const auto nb = kg.undirected_neighbors(b);
                CHECK(std::binary_search(nb.begin(), nb.end(), a));
            }
        }
    }
}

TEST_CASE("induce_feature_subgraph keeps feature-feature edges only") {
    // f1-f2 (r1), f1-b1 (r2), b1-b2 (r1); features {f1, f2}
    TempDir dir("induce");
    write_file(dir.file("triples.tsv"), "f1\tr1\tf2\nf1\tr2\tb1\nb1\tr1\tb2\n");
    write_file(dir.file("fm.tsv"), "x1\tf1\nx2\tf2\n");
    const auto loaded = load_kg(dir.file("triples.tsv"), dir.file("fm.tsv"));

    const auto sub = induce_feature_subgraph(loaded.kg, loaded.mapping);
    CHECK(sub.node_count() == 2);
    CHECK(sub.relation_count() == 1);
    REQUIRE(sub.edges().size() == 1);
    CHECK(sub.edges()[0] == Triple{0, 0, 1});
    CHECK(sub.node_labels() == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("induce_feature_subgraph with no feature-feature edges yields isolated nodes") {
    TempDir dir("induce_iso");
    write_file(dir.file("triples.tsv"), "f1\tr1\tb1\nf2\tr1\tb1\n");
    write_file(dir.file("fm.tsv"), "x1\tf1\nx2\tf2\n");
    const auto loaded = load_kg(dir.file("triples.tsv"), dir.file("fm.tsv"));
    const auto sub = induce_feature_subgraph(loaded.kg, loaded.mapping);
    CHECK(sub.node_count() == 2);
    CHECK(sub.edges().empty());
}

TEST_CASE("induce_feature_subgraph collapses parallel relations and is idempotent") {
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const auto kg = random_kg(rng, 15, 4, 40);
        FeatureMapping fm;
        for (int j = 0; j < 6; ++j) {
            fm.feature_names.push_back("f" + std::to_string(j));
            fm.node_of_feature.push_back(j * 2);  // features on even nodes
        }
        const auto once = induce_feature_subgraph(kg, fm);
        const auto twice = induce_feature_subgraph(once, FeatureMapping::identity(fm.feature_names));
        CHECK(once.node_count() == twice.node_count());
        CHECK(once.edges() == twice.edges());
    }
}

TEST_CASE("drop_edges") {
    Rng rng(11);
    const auto kg = random_kg(rng, 10, 2, 10);

    SUBCASE("keep_fraction 1.0 is the identity") {
        for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
            const auto kept = drop_edges(kg, 1.0, seed);
            CHECK(kept.edges() == kg.edges());
        }
    }
    SUBCASE("keep 0.5 of 10 edges keeps exactly 5, a subset of the original") {
        const auto kept = drop_edges(kg, 0.5, 3);
        CHECK(kept.edges().size() == 5);
        CHECK(kept.node_count() == kg.node_count());
        for (const auto& e : kept.edges()) {
            CHECK(std::find(kg.edges().begin(), kg.edges().end(), e) != kg.edges().end());
        }
    }
    SUBCASE("same seed gives the same surviving set") {
        const auto a = drop_edges(kg, 0.4, 17);
        const auto b = drop_edges(kg, 0.4, 17);
        CHECK(a.edges() == b.edges());
    }
    SUBCASE("fraction out of range") {
        CHECK_THROWS_AS(drop_edges(kg, 0.0, 1), ConfigError);
        CHECK_THROWS_AS(drop_edges(kg, 1.5, 1), ConfigError);
        CHECK_THROWS_AS(drop_edges(kg, -0.1, 1), ConfigError);
    }
}

TEST_CASE("adjacency is consistent with the edge list") {
    Rng rng(23);
    const auto kg = random_kg(rng, 9, 3, 20);
    const auto rebuilt = KnowledgeGraph(kg.node_count(), kg.relation_count(), kg.edges());
    for (int v = 0; v < kg.node_count(); ++v) {
        CHECK(kg.out_adjacency(v) == rebuilt.out_adjacency(v));
        CHECK(kg.in_adjacency(v) == rebuilt.in_adjacency(v));
    }
}

TEST_CASE("build_feature_csr mirrors undirected neighborhoods") {
    Rng rng(5);
    const auto kg = random_kg(rng, 8, 1, 14);
    const auto csr = build_feature_csr(kg);
    REQUIRE(csr.node_count == 8);
    for (int v = 0; v < 8; ++v) {
        const auto expected = kg.undirected_neighbors(v);
        std::vector<int> got(csr.neighbors.begin() + csr.offsets[v],
                             csr.neighbors.begin() + csr.offsets[v + 1]);
        CHECK(got == expected);
    }
}
