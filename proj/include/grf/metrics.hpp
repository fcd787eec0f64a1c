#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grf/index.hpp"

namespace grf {

// AP@k with R = number of relevant items inside the top k:
// AP = (1/R) * sum_{r<=k} Precision(r) * rel(r), and 0 when R = 0.
double average_precision_at_k(const std::vector<std::uint32_t>& retrieved_labels,
                              std::uint32_t query_label, std::size_t k);

// 1 iff the query label is among the modal label(s) of the top k
// (ties count as hits), else 0.
int majority_vote_hit(const std::vector<std::uint32_t>& retrieved_labels,
                      std::uint32_t query_label, std::size_t k);

struct PerQuery {
    std::string query_id;
    double ap = 0;
    int mv_hit = 0;
    std::vector<std::string> retrieved_ids;
    std::vector<std::uint32_t> retrieved_labels;
};

struct EvalReport {
    std::size_t k = 5;
    double map_k = 0;
    double mmv_k = 0;
    std::vector<PerQuery> per_query;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

// Runs query() over the test split and aggregates mAP(k) / mMV(k).
EvalReport evaluate(const RetrievalIndex& index, const Checkpoint& ckpt,
                    const FeatureDataset& ds, const SparseGraph& adj_sym,
                    std::size_t k, std::size_t k_attach);

std::string report_to_json(const EvalReport& report);
void save_report_json(const EvalReport& report, const std::string& path);

// `metric,k,value` summary plus a per-query table.
void save_report_csv(const EvalReport& report, const std::string& summary_path,
                     const std::string& per_query_path);

} // namespace grf
