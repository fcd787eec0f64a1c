#include "grf/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "grf/binio.hpp"
#include "grf/error.hpp"

#include <nlohmann/json.hpp>

namespace grf {

double average_precision_at_k(const std::vector<std::uint32_t>& retrieved_labels,
                              std::uint32_t query_label, std::size_t k) {
    if (retrieved_labels.empty()) throw ParamError("average_precision_at_k: empty ranking");
    if (k < 1 || k > retrieved_labels.size())
        throw ParamError("average_precision_at_k: k must satisfy 1 <= k <= list length");
    std::size_t relevant = 0;
    double sum = 0.0;
    for (std::size_t r = 1; r <= k; ++r) {
        if (retrieved_labels[r - 1] == query_label) {
            ++relevant;
            sum += static_cast<double>(relevant) / static_cast<double>(r);
        }
    }
    if (relevant == 0) return 0.0;
    return sum / static_cast<double>(relevant);
}

int majority_vote_hit(const std::vector<std::uint32_t>& retrieved_labels,
                      std::uint32_t query_label, std::size_t k) {
    if (k < 1 || k > retrieved_labels.size())
        throw ParamError("majority_vote_hit: k must satisfy 1 <= k <= list length");
    std::map<std::uint32_t, std::size_t> counts;
    for (std::size_t r = 0; r < k; ++r) ++counts[retrieved_labels[r]];
    std::size_t top = 0;
    for (const auto& [label, c] : counts) top = std::max(top, c);
    auto it = counts.find(query_label);
    return (it != counts.end() && it->second == top) ? 1 : 0;
}

EvalReport evaluate(const RetrievalIndex& index, const Checkpoint& ckpt,
                    const FeatureDataset& ds, const SparseGraph& adj_sym, std::size_t k,
                    std::size_t k_attach) {
    auto test_rows = ds.split_indices(Split::Test);
    if (test_rows.empty()) throw ParamError("evaluate: test split is empty");
    if (k < 1 || k > index.n())
        throw ParamError("evaluate: k must satisfy 1 <= k <= index size");

    EvalReport report;
    report.k = k;
    double ap_sum = 0.0;
    double mv_sum = 0.0;
    for (std::size_t row : test_rows) {
        std::vector<float> q(ds.row(row), ds.row(row) + ds.d);
        PerQuery pq;
        pq.query_id = ds.items[row].id;
        try {
            auto hits = query(index, ckpt, ds, adj_sym, q, k, k_attach);
            for (const auto& h : hits) {
                pq.retrieved_ids.push_back(h.id);
                pq.retrieved_labels.push_back(h.label);
            }
            pq.ap = average_precision_at_k(pq.retrieved_labels, ds.items[row].label, k);
            pq.mv_hit = majority_vote_hit(pq.retrieved_labels, ds.items[row].label, k);
        } catch (const std::exception&) {
            ++report.skipped;
            continue;
        }
        ap_sum += pq.ap;
        mv_sum += pq.mv_hit;
        report.per_query.push_back(std::move(pq));
        ++report.evaluated;
    }
    if (report.evaluated > 0) {
        report.map_k = ap_sum / static_cast<double>(report.evaluated);
        report.mmv_k = mv_sum / static_cast<double>(report.evaluated);
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["map_k"] = report.map_k;
    j["mmv_k"] = report.mmv_k;
    j["evaluated"] = report.evaluated;
    j["skipped"] = report.skipped;
    j["per_query"] = nlohmann::ordered_json::array();
    for (const auto& pq : report.per_query) {
        nlohmann::ordered_json q;
        q["query_id"] = pq.query_id;
        q["ap"] = pq.ap;
        q["mv_hit"] = pq.mv_hit;
        q["retrieved_ids"] = pq.retrieved_ids;
        q["retrieved_labels"] = pq.retrieved_labels;
        j["per_query"].push_back(std::move(q));
    }
    return j.dump(2) + "\n";
}

void save_report_json(const EvalReport& report, const std::string& path) {
    bin::write_file(path, report_to_json(report));
}

void save_report_csv(const EvalReport& report, const std::string& summary_path,
                     const std::string& per_query_path) {
    {
        std::ofstream out(summary_path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open file for writing: " + summary_path);
        char buf[64];
        out << "metric,k,value\n";
        std::snprintf(buf, sizeof(buf), "%.17g", report.map_k);
        out << "map," << report.k << ',' << buf << "\n";
        std::snprintf(buf, sizeof(buf), "%.17g", report.mmv_k);
        out << "mmv," << report.k << ',' << buf << "\n";
        out << "evaluated," << report.k << ',' << report.evaluated << "\n";
        out << "skipped," << report.k << ',' << report.skipped << "\n";
        if (!out) throw DataError("write failure: " + summary_path);
    }
    {
        std::ofstream out(per_query_path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open file for writing: " + per_query_path);
        char buf[64];
        out << "query_id,ap,mv_hit,retrieved_ids,retrieved_labels\n";
        for (const auto& pq : report.per_query) {
            std::snprintf(buf, sizeof(buf), "%.17g", pq.ap);
            out << pq.query_id << ',' << buf << ',' << pq.mv_hit << ',';
            for (std::size_t i = 0; i < pq.retrieved_ids.size(); ++i)
                out << (i ? ";" : "") << pq.retrieved_ids[i];
            out << ',';
            for (std::size_t i = 0; i < pq.retrieved_labels.size(); ++i)
                out << (i ? ";" : "") << pq.retrieved_labels[i];
            out << "\n";
        }
        if (!out) throw DataError("write failure: " + per_query_path);
    }
}

} // namespace grf
