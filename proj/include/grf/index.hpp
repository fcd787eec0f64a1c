#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grf/dataset.hpp"
#include "grf/graph.hpp"
#include "grf/model.hpp"

namespace grf {

enum class IndexSubset { Train, TrainVal, All };

IndexSubset subset_from_name(const std::string& name);
const char* subset_name(IndexSubset s);

// Persisted latent embeddings (mu rows, binary32) keyed by item id/label.
// Immutable after build; ranking over it is an exact linear scan.
struct RetrievalIndex {
    std::size_t d_latent = 0;
    std::vector<float> embeddings; // n * d_latent, row-major
    std::vector<std::string> ids;
    std::vector<std::uint32_t> labels;
    std::uint64_t checkpoint_hash = 0;

    std::size_t n() const { return ids.size(); }
    const float* row(std::size_t i) const { return embeddings.data() + i * d_latent; }
};

struct QueryHit {
    std::string id;
    std::uint32_t label = 0;
    double distance = 0;
};

// Eval-mode encode of the selected split; z = mu is what gets stored.
RetrievalIndex build_index(const Checkpoint& ckpt, const FeatureDataset& ds,
                           const SparseGraph& adj_sym, const NormalizedAdjacency& norm_adj,
                           IndexSubset subset);

// attach_query -> eval encode of the augmented graph -> query row's mu ->
// exact Euclidean distances to all index rows -> ascending (distance, id).
std::vector<QueryHit> query(const RetrievalIndex& index, const Checkpoint& ckpt,
                            const FeatureDataset& ds, const SparseGraph& adj_sym,
                            const std::vector<float>& q, std::size_t top_k,
                            std::size_t k_attach);

struct BatchEntry {
    bool ok = false;
    std::vector<QueryHit> hits;
    std::string error;
};

// Element-wise equal to independent query() calls; per-query failures are
// reported and the batch continues.
std::vector<BatchEntry> query_batch(const RetrievalIndex& index, const Checkpoint& ckpt,
                                    const FeatureDataset& ds, const SparseGraph& adj_sym,
                                    const std::vector<std::vector<float>>& queries,
                                    std::size_t top_k, std::size_t k_attach);

// Index binary format, magic "GRFI".
void save_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex load_index(const std::string& path);
std::string serialize_index(const RetrievalIndex& index);
RetrievalIndex parse_index(std::string_view bytes);

void export_hits_csv(const std::vector<std::pair<std::string, std::vector<QueryHit>>>& results,
                     const std::string& path);

} // namespace grf
