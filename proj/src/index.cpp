#include "grf/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "grf/binio.hpp"
#include "grf/error.hpp"

namespace grf {

IndexSubset subset_from_name(const std::string& name) {
    if (name == "train") return IndexSubset::Train;
    if (name == "train+val") return IndexSubset::TrainVal;
    if (name == "all") return IndexSubset::All;
    throw ParamError("unknown subset: '" + name + "' (expected train|train+val|all)");
}

const char* subset_name(IndexSubset s) {
    switch (s) {
        case IndexSubset::Train: return "train";
        case IndexSubset::TrainVal: return "train+val";
        default: return "all";
    }
}

namespace {

// temporarily drops requires_grad on every parameter so eval-mode encodes
// record nothing on the tape
struct NoGradGuard {
    explicit NoGradGuard(ModelParams& params) : params_(params) {
        for (auto& [n, t] : params_.trainable) {
            saved_.push_back(t->requires_grad);
            t->requires_grad = false;
        }
    }
    ~NoGradGuard() {
        for (std::size_t i = 0; i < saved_.size(); ++i)
            params_.trainable[i].second->requires_grad = saved_[i];
    }
    ModelParams& params_;
    std::vector<bool> saved_;
};

bool in_subset(Split s, IndexSubset subset) {
    switch (subset) {
        case IndexSubset::Train: return s == Split::Train;
        case IndexSubset::TrainVal: return s == Split::Train || s == Split::Val;
        default: return true;
    }
}

} // namespace

RetrievalIndex build_index(const Checkpoint& ckpt, const FeatureDataset& ds,
                           const SparseGraph& adj_sym, const NormalizedAdjacency& norm_adj,
                           IndexSubset subset) {
    ds.validate();
    if (ckpt.config.d_in != ds.d)
        throw ParamError("build_index: checkpoint d_in " + std::to_string(ckpt.config.d_in) +
                         " != dataset dimension " + std::to_string(ds.d));
    if (adj_sym.n != ds.n()) throw ParamError("build_index: graph does not cover the dataset");

    ModelParams& params = const_cast<ModelParams&>(ckpt.params);
    NoGradGuard guard(params);
    Tape tape;
    RngStream dummy(0);
    TensorPtr x = features_tensor(ds);
    LatentState latent = encode(tape, params, ckpt.config, x, adj_sym, norm_adj, dummy, Mode::Eval);

    RetrievalIndex index;
    index.d_latent = ckpt.config.d_latent;
    index.checkpoint_hash = bin::fnv1a64(serialize_checkpoint(ckpt));
    for (std::size_t i = 0; i < ds.n(); ++i) {
        if (!in_subset(ds.items[i].split, subset)) continue;
        index.ids.push_back(ds.items[i].id);
        index.labels.push_back(ds.items[i].label);
        for (std::size_t j = 0; j < index.d_latent; ++j)
            index.embeddings.push_back(
                static_cast<float>(latent.mu->at(static_cast<int>(i), static_cast<int>(j))));
    }
    if (index.ids.empty())
        throw ParamError(std::string("build_index: subset '") + subset_name(subset) +
                         "' selects no items");
    return index;
}

std::vector<QueryHit> query(const RetrievalIndex& index, const Checkpoint& ckpt,
                            const FeatureDataset& ds, const SparseGraph& adj_sym,
                            const std::vector<float>& q, std::size_t top_k,
                            std::size_t k_attach) {
    if (q.size() != ds.d)
        throw ParamError("query: vector dimension " + std::to_string(q.size()) +
                         " != dataset dimension " + std::to_string(ds.d));
    if (top_k < 1 || top_k > index.n())
        throw ParamError("query: K must satisfy 1 <= K <= index size (K=" +
                         std::to_string(top_k) + ", index=" + std::to_string(index.n()) + ")");
    if (index.d_latent != ckpt.config.d_latent)
        throw ParamError("query: index/checkpoint latent dimension mismatch");

    auto [augmented, qi] = attach_query(adj_sym, ds, q, k_attach);
    NormalizedAdjacency norm = normalize(augmented);

    TensorPtr x = make_tensor(static_cast<int>(ds.n()) + 1, static_cast<int>(ds.d));
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        x->data[i] = static_cast<double>(ds.features[i]);
    for (std::size_t j = 0; j < ds.d; ++j)
        x->data[ds.n() * ds.d + j] = static_cast<double>(q[j]);

    ModelParams& params = const_cast<ModelParams&>(ckpt.params);
    NoGradGuard guard(params);
    Tape tape;
    RngStream dummy(0);
    LatentState latent = encode(tape, params, ckpt.config, x, augmented, norm, dummy, Mode::Eval);

    // round to binary32 so query and stored embeddings live in the same grid
    std::vector<float> emb(index.d_latent);
    for (std::size_t j = 0; j < index.d_latent; ++j)
        emb[j] = static_cast<float>(latent.mu->at(static_cast<int>(qi), static_cast<int>(j)));

    std::vector<std::size_t> order(index.n());
    std::vector<double> dist(index.n());
    for (std::size_t i = 0; i < index.n(); ++i) {
        order[i] = i;
        const float* row = index.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < index.d_latent; ++j) {
            double diff = static_cast<double>(emb[j]) - static_cast<double>(row[j]);
            s += diff * diff;
        }
        dist[i] = std::sqrt(s);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return index.ids[a] < index.ids[b];
    });

    std::vector<QueryHit> hits;
    hits.reserve(top_k);
    for (std::size_t r = 0; r < top_k; ++r) {
        std::size_t i = order[r];
        hits.push_back({index.ids[i], index.labels[i], dist[i]});
    }
    return hits;
}

std::vector<BatchEntry> query_batch(const RetrievalIndex& index, const Checkpoint& ckpt,
                                    const FeatureDataset& ds, const SparseGraph& adj_sym,
                                    const std::vector<std::vector<float>>& queries,
                                    std::size_t top_k, std::size_t k_attach) {
    std::vector<BatchEntry> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        try {
            out[i].hits = query(index, ckpt, ds, adj_sym, queries[i], top_k, k_attach);
            out[i].ok = true;
        } catch (const std::exception& e) {
            out[i].ok = false;
            out[i].error = e.what();
        }
    }
    return out;
}

// ---- binary format (GRFI) ----

std::string serialize_index(const RetrievalIndex& index) {
    bin::Writer w;
    w.bytes("GRFI", 4);
    w.u32(1);
    w.u64(index.n());
    w.u64(index.d_latent);
    w.u64(index.checkpoint_hash);
    for (float v : index.embeddings) w.f32(v);
    for (std::uint32_t v : index.labels) w.u32(v);
    for (const auto& id : index.ids) w.str(id);
    return w.take();
}

RetrievalIndex parse_index(std::string_view bytes) {
    bin::Reader r(bytes);
    bin::expect_magic(r, "GRFI", "index");
    std::uint32_t version = r.u32();
    if (version != 1) throw DataError("unsupported index format version " + std::to_string(version));
    RetrievalIndex index;
    std::uint64_t n = r.u64();
    index.d_latent = r.u64();
    index.checkpoint_hash = r.u64();
    if (n == 0 || index.d_latent == 0) throw DataError("index: empty index");
    index.embeddings.resize(n * index.d_latent);
    for (auto& v : index.embeddings) v = r.f32();
    index.labels.resize(n);
    for (auto& v : index.labels) v = r.u32();
    index.ids.resize(n);
    for (auto& id : index.ids) id = r.str();
    return index;
}

void save_index(const RetrievalIndex& index, const std::string& path) {
    bin::write_file(path, serialize_index(index));
}

RetrievalIndex load_index(const std::string& path) { return parse_index(bin::read_file(path)); }

void export_hits_csv(const std::vector<std::pair<std::string, std::vector<QueryHit>>>& results,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "query_id,rank,id,label,distance\n";
    char buf[64];
    for (const auto& [qid, hits] : results) {
        for (std::size_t r = 0; r < hits.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", hits[r].distance);
            out << qid << ',' << (r + 1) << ',' << hits[r].id << ',' << hits[r].label << ','
                << buf << "\n";
        }
    }
    if (!out) throw DataError("write failure: " + path);
}

} // namespace grf
