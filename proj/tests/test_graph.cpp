#include "doctest.h"

#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "grf/binio.hpp"
#include "grf/error.hpp"
#include "grf/graph.hpp"

#include "support/testutil.hpp"

using namespace grf;

namespace {

FeatureDataset four_points() {
    FeatureDataset ds;
    ds.d = 2;
    ds.class_names = {"class_0"};
    const float pts[4][2] = {{0, 0}, {1, 0}, {0, 1}, {5, 5}};
    for (int i = 0; i < 4; ++i) {
        ds.items.push_back({"n" + std::to_string(i), 0, Split::Unassigned});
        ds.features.push_back(pts[i][0]);
        ds.features.push_back(pts[i][1]);
    }
    return ds;
}

std::set<std::size_t> row_set(const SparseGraph& g, std::size_t i) {
    std::set<std::size_t> out;
    for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e)
        out.insert(g.cols[e]);
    return out;
}

SparseGraph graph_from_edges(std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::set<std::size_t>> rows(n);
    for (auto [i, j] : edges) rows[i].insert(j);
    SparseGraph g;
    g.n = n;
    g.row_offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        g.row_offsets[i + 1] = g.row_offsets[i] + rows[i].size();
        for (std::size_t j : rows[i]) {
            g.cols.push_back(j);
            g.values.push_back(1.0f);
        }
    }
    return g;
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("knn_graph on four points matches the geometry") {
    FeatureDataset ds = four_points();
    SparseGraph g = knn_graph(ds, 2, KnnOptions{}, 1);
    CHECK(row_set(g, 0) == std::set<std::size_t>{1, 2});
    CHECK(row_set(g, 3).count(0) == 0); // node 3's neighbors are 1 and 2
}

TEST_CASE("raw knn graph has out-degree k and no self edges") {
    FeatureDataset ds = testutil::random_dataset(60, 6, 4);
    SparseGraph g = knn_graph(ds, 7, KnnOptions{}, 1);
    for (std::size_t i = 0; i < g.n; ++i) {
        CHECK(g.row_offsets[i + 1] - g.row_offsets[i] == 7);
        CHECK(row_set(g, i).count(i) == 0);
    }
}

TEST_CASE("exact knn equals the brute-force oracle") {
    FeatureDataset ds = testutil::random_dataset(200, 16, 8);
    for (std::size_t k : {5, 15}) {
        SparseGraph g = knn_graph(ds, k, KnnOptions{}, 1);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            auto oracle = testutil::brute_force_knn(ds, ds.row(i), i, k);
            CHECK(row_set(g, i) == std::set<std::size_t>(oracle.begin(), oracle.end()));
        }
    }
}

TEST_CASE("exact knn with threads matches single-threaded output") {
    FeatureDataset ds = testutil::random_dataset(300, 8, 12);
    KnnOptions serial, parallel;
    parallel.threads = 4;
    CHECK(serialize_graph(knn_graph(ds, 6, serial, 1)) ==
          serialize_graph(knn_graph(ds, 6, parallel, 1)));
}

TEST_CASE("knn_graph rejects bad k and tiny inputs") {
    FeatureDataset ds = testutil::random_dataset(10, 4, 3);
    CHECK_THROWS_AS(knn_graph(ds, 10, KnnOptions{}, 1), ParamError);
    CHECK_THROWS_AS(knn_graph(ds, 0, KnnOptions{}, 1), ParamError);
    FeatureDataset one = testutil::random_dataset(1, 4, 3);
    CHECK_THROWS_AS(knn_graph(one, 1, KnnOptions{}, 1), ParamError);
}

TEST_CASE("kdtree recall against exact is at least 0.90") {
    FeatureDataset ds = testutil::random_dataset(2000, 64, 77);
    const std::size_t k = 10;
    KnnOptions opts;
    opts.method = KnnMethod::KdTree;
    SparseGraph approx = knn_graph(ds, k, opts, 5);
    SparseGraph exact = knn_graph(ds, k, KnnOptions{}, 5);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto a = row_set(approx, i);
        for (std::size_t j : row_set(exact, i)) hit += a.count(j);
    }
    double recall = static_cast<double>(hit) / static_cast<double>(k * ds.n());
    CHECK(recall >= 0.90);
}

TEST_CASE("symmetrize adds reverse edges and is idempotent") {
    SparseGraph g = graph_from_edges(3, {{0, 1}});
    SparseGraph s = symmetrize(g);
    CHECK(row_set(s, 0) == std::set<std::size_t>{1});
    CHECK(row_set(s, 1) == std::set<std::size_t>{0});
    CHECK(s.is_symmetric());
    CHECK(serialize_graph(symmetrize(s)) == serialize_graph(s));
}

TEST_CASE("symmetrize matches a dense transpose oracle") {
    FeatureDataset ds = testutil::random_dataset(100, 8, 21);
    SparseGraph g = knn_graph(ds, 5, KnnOptions{}, 1);
    SparseGraph s = symmetrize(g);
    // dense oracle: B = max(A, A')
    std::vector<std::vector<float>> dense(100, std::vector<float>(100, 0.0f));
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            dense[i][g.cols[e]] = std::max(dense[i][g.cols[e]], g.values[e]);
            dense[g.cols[e]][i] = std::max(dense[g.cols[e]][i], g.values[e]);
        }
    for (std::size_t i = 0; i < s.n; ++i) {
        std::size_t deg = s.row_offsets[i + 1] - s.row_offsets[i];
        CHECK(deg >= 5);
        CHECK(deg < 100);
        for (std::uint64_t e = s.row_offsets[i]; e < s.row_offsets[i + 1]; ++e)
            CHECK(s.values[e] == dense[i][s.cols[e]]);
        for (std::size_t j = 0; j < 100; ++j)
            if (dense[i][j] != 0.0f) CHECK(row_set(s, i).count(j) == 1);
    }
}

TEST_CASE("normalize handles a single isolated node") {
    SparseGraph g;
    g.n = 1;
    g.row_offsets = {0, 0};
    NormalizedAdjacency norm = normalize(g);
    REQUIRE(norm.nnz() == 1);
    CHECK(norm.values[0] == doctest::Approx(1.0));
}

TEST_CASE("normalize of the two-node single-edge graph is all 0.5") {
    SparseGraph g = symmetrize(graph_from_edges(2, {{0, 1}}));
    NormalizedAdjacency norm = normalize(g);
    REQUIRE(norm.nnz() == 4);
    for (double v : norm.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("normalize rejects non-symmetric input") {
    SparseGraph g = graph_from_edges(3, {{0, 1}});
    CHECK_THROWS_AS(normalize(g), ParamError);
}

TEST_CASE("normalized adjacency is symmetric, in (0,1], spectral radius <= 1") {
    FeatureDataset ds = testutil::random_dataset(30, 4, 9);
    SparseGraph sym = symmetrize(knn_graph(ds, 4, KnnOptions{}, 1));
    NormalizedAdjacency norm = normalize(sym);

    std::vector<std::vector<double>> dense(norm.n, std::vector<double>(norm.n, 0.0));
    for (std::size_t i = 0; i < norm.n; ++i)
        for (std::uint64_t e = norm.row_offsets[i]; e < norm.row_offsets[i + 1]; ++e)
            dense[i][norm.cols[e]] = norm.values[e];
    for (std::size_t i = 0; i < norm.n; ++i) {
        CHECK(dense[i][i] > 0.0);
        for (std::size_t j = 0; j < norm.n; ++j) {
            CHECK(dense[i][j] == dense[j][i]); // exact
            CHECK(dense[i][j] <= 1.0);
            CHECK(dense[i][j] >= 0.0);
        }
    }

    // power iteration on the dense matrix
    std::vector<double> v(norm.n, 1.0), next(norm.n);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < norm.n; ++i) {
            next[i] = 0.0;
            for (std::size_t j = 0; j < norm.n; ++j) next[i] += dense[i][j] * v[j];
        }
        double norm2 = 0.0;
        for (double x : next) norm2 += x * x;
        norm2 = std::sqrt(norm2);
        lambda = norm2;
        for (std::size_t i = 0; i < norm.n; ++i) v[i] = next[i] / norm2;
    }
    CHECK(lambda <= 1.0 + 1e-9);
}

TEST_CASE("attach_query connects bidirectionally and keeps the original intact") {
    FeatureDataset ds = four_points();
    SparseGraph sym = symmetrize(knn_graph(ds, 2, KnnOptions{}, 1));
    std::string before = serialize_graph(sym);

    std::vector<float> q = {0.0f, 0.0f}; // same as node 0
    auto [aug, qi] = attach_query(sym, ds, q, 2);
    CHECK(qi == 4);
    CHECK(aug.n == 5);
    CHECK(row_set(aug, qi).count(0) == 1); // zero-distance node is a neighbor
    CHECK(aug.is_symmetric());
    CHECK(serialize_graph(sym) == before);

    // original rows keep their edges
    for (std::size_t i = 0; i < sym.n; ++i) {
        auto orig = row_set(sym, i);
        auto now = row_set(aug, i);
        for (std::size_t j : orig) CHECK(now.count(j) == 1);
    }
}

TEST_CASE("attach_query rejects dimension mismatch") {
    FeatureDataset ds = four_points();
    SparseGraph sym = symmetrize(knn_graph(ds, 2, KnnOptions{}, 1));
    CHECK_THROWS_AS(attach_query(sym, ds, {1.0f}, 2), ParamError);
}

TEST_CASE("attached query neighbors are intra-class on separated clusters") {
    FeatureDataset ds = synth_clusters(50, 2, 8, 10.0, 1.0, 3);
    SparseGraph sym = symmetrize(knn_graph(ds, 10, KnnOptions{}, 1));
    RngStream rng(123);
    for (std::uint32_t c = 0; c < 2; ++c) {
        // query drawn from class c's distribution
        std::vector<float> q(ds.d, 0.0f);
        q[c] = 10.0f;
        for (auto& v : q) v += static_cast<float>(rng.normal());
        auto [aug, qi] = attach_query(sym, ds, q, 10);
        std::size_t intra = 0;
        for (std::uint64_t e = aug.row_offsets[qi]; e < aug.row_offsets[qi + 1]; ++e)
            if (ds.items[aug.cols[e]].label == c) ++intra;
        CHECK(static_cast<double>(intra) / 10.0 >= 0.9);
    }
}

TEST_CASE("graph binary round trip and magic rejection") {
    FeatureDataset ds = testutil::random_dataset(40, 4, 6);
    SparseGraph g = symmetrize(knn_graph(ds, 3, KnnOptions{}, 1));
    auto path = testutil::temp_path("graph.grfg");
    save_graph(g, path);
    SparseGraph back = load_graph(path);
    CHECK(serialize_graph(back) == serialize_graph(g));

    grf::bin::write_file(path, "XXXXbogus");
    CHECK_THROWS_WITH_AS(load_graph(path), doctest::Contains("magic"), DataError);
}

TEST_CASE("tsv export lists every edge") {
    SparseGraph g = symmetrize(graph_from_edges(3, {{0, 1}, {1, 2}}));
    auto path = testutil::temp_path("edges.tsv");
    export_tsv(g, path);
    std::ifstream in(path);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == g.nnz());
}

} // TEST_SUITE
