#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grf/dataset.hpp"

namespace grf {

// Sparse adjacency in compressed row form. The raw k-NN graph is directed
// (each row holds exactly k neighbors); symmetrize() turns it into the
// undirected message-passing operand.
struct SparseGraph {
    std::size_t n = 0;
    std::vector<std::uint64_t> row_offsets; // n + 1
    std::vector<std::uint64_t> cols;
    std::vector<float> values;

    std::size_t nnz() const { return cols.size(); }
    bool has_edge(std::size_t i, std::size_t j) const;

    void validate() const;
    bool is_symmetric() const;
};

// D^{-1/2} (A + I) D^{-1/2} with double-precision values in (0, 1].
struct NormalizedAdjacency {
    std::size_t n = 0;
    std::vector<std::uint64_t> row_offsets;
    std::vector<std::uint64_t> cols;
    std::vector<double> values;

    std::size_t nnz() const { return cols.size(); }
};

enum class KnnMethod { Exact, KdTree };

KnnMethod knn_method_from_name(const std::string& name);
const char* knn_method_name(KnnMethod m);

struct KnnOptions {
    KnnMethod method = KnnMethod::Exact;
    int trees = 8;      // kd-tree forest size
    int checks = 2048;  // leaf-visit budget per query (unique points scored)
    int leaf_size = 16;
    int threads = 1;
};

// Row i holds the k (approximate) nearest neighbors of node i by Euclidean
// distance, weight 1.0, ties broken by lower node index. No self edges.
SparseGraph knn_graph(const FeatureDataset& ds, std::size_t k, const KnnOptions& opts,
                      std::uint64_t seed);

// Union of edges and their reverses; weights take the elementwise max.
SparseGraph symmetrize(const SparseGraph& g);

// A + I with unit self-loop weights (idempotent on the diagonal).
SparseGraph with_self_loops(const SparseGraph& g);

// Requires a symmetric graph; adds self-loops and scales by degrees.
NormalizedAdjacency normalize(const SparseGraph& g);

// New node bidirectionally connected to its k nearest database nodes.
// Returns the augmented graph and the new node's index (== g.n).
std::pair<SparseGraph, std::size_t> attach_query(const SparseGraph& g,
                                                 const FeatureDataset& ds,
                                                 const std::vector<float>& q,
                                                 std::size_t k);

// Binary graph format, magic "GRFG".
void save_graph(const SparseGraph& g, const std::string& path);
SparseGraph load_graph(const std::string& path);
std::string serialize_graph(const SparseGraph& g);
SparseGraph parse_graph(std::string_view bytes);

// "src<TAB>dst<TAB>weight" edge list for inspection.
void export_tsv(const SparseGraph& g, const std::string& path);

} // namespace grf
