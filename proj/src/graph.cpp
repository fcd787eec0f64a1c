#include "grf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <queue>
#include <thread>

#include "grf/binio.hpp"
#include "grf/error.hpp"
#include "grf/rng.hpp"

namespace grf {

bool SparseGraph::has_edge(std::size_t i, std::size_t j) const {
    auto begin = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
    auto end = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
    return std::binary_search(begin, end, static_cast<std::uint64_t>(j));
}

void SparseGraph::validate() const {
    if (row_offsets.size() != n + 1) throw DataError("graph: row_offsets length must be n+1");
    if (row_offsets[0] != 0) throw DataError("graph: row_offsets[0] must be 0");
    if (values.size() != cols.size()) throw DataError("graph: values/cols length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (row_offsets[i + 1] < row_offsets[i])
            throw DataError("graph: row_offsets must be non-decreasing");
        std::uint64_t prev = 0;
        bool first = true;
        for (std::uint64_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            if (cols[e] >= n) throw DataError("graph: column index out of range");
            if (!first && cols[e] <= prev)
                throw DataError("graph: duplicate or unsorted column in row " + std::to_string(i));
            prev = cols[e];
            first = false;
        }
    }
    if (row_offsets[n] != cols.size()) throw DataError("graph: row_offsets[n] != nnz");
}

bool SparseGraph::is_symmetric() const {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint64_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            std::size_t j = cols[e];
            auto begin = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[j]);
            auto end = cols.begin() + static_cast<std::ptrdiff_t>(row_offsets[j + 1]);
            auto it = std::lower_bound(begin, end, static_cast<std::uint64_t>(i));
            if (it == end || *it != i) return false;
            std::size_t rev = static_cast<std::size_t>(it - cols.begin());
            if (values[rev] != values[e]) return false;
        }
    }
    return true;
}

KnnMethod knn_method_from_name(const std::string& name) {
    if (name == "exact") return KnnMethod::Exact;
    if (name == "kdtree") return KnnMethod::KdTree;
    throw ParamError("unknown ann method: '" + name + "' (expected exact|kdtree)");
}

const char* knn_method_name(KnnMethod m) {
    return m == KnnMethod::Exact ? "exact" : "kdtree";
}

namespace {

double sqdist(const float* a, const float* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += diff * diff;
    }
    return s;
}

// k smallest by (distance, index) against all points, excluding `self`
std::vector<std::size_t> exact_neighbors(const FeatureDataset& ds, const float* q,
                                         std::size_t self, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(ds.n());
    for (std::size_t j = 0; j < ds.n(); ++j) {
        if (j == self) continue;
        all.emplace_back(sqdist(q, ds.row(j), ds.d), j);
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = all[i].second;
    return out;
}

// ---- randomized kd-tree forest (FLANN-style) ----

struct KdNode {
    int split_dim = -1;
    float split_val = 0.0f;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t begin = 0; // leaf point range
    std::uint32_t end = 0;
    bool is_leaf() const { return split_dim < 0; }
};

class KdForest {
public:
    KdForest(const FeatureDataset& ds, const KnnOptions& opts, std::uint64_t seed)
        : ds_(ds), leaf_size_(static_cast<std::size_t>(std::max(1, opts.leaf_size))) {
        int trees = std::max(1, opts.trees);
        trees_.resize(trees);
        order_.resize(trees);
        RngStream rng = RngStream::derive(seed, 0x4b4454524545ULL);
        for (int t = 0; t < trees; ++t) {
            order_[t].resize(ds.n());
            std::iota(order_[t].begin(), order_[t].end(), 0u);
            build(t, 0, static_cast<std::uint32_t>(ds.n()), rng);
        }
    }

    // best-bin-first over all trees with a budget of unique candidate points
    std::vector<std::size_t> search(const float* q, std::size_t self, std::size_t k,
                                    int checks, std::vector<std::uint32_t>& visit_stamp,
                                    std::uint32_t stamp) const {
        using HeapItem = std::pair<double, std::pair<int, std::int32_t>>; // (bound, (tree, node))
        std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> frontier;
        for (int t = 0; t < static_cast<int>(trees_.size()); ++t)
            frontier.push({0.0, {t, 0}});

        // max-heap of current best (distance, index)
        std::priority_queue<std::pair<double, std::size_t>> best;
        int scored = 0;
        while (!frontier.empty() && scored < checks) {
            auto [bound, loc] = frontier.top();
            frontier.pop();
            if (best.size() == k && bound > best.top().first) continue;
            auto [t, node_id] = loc;
            const auto& nodes = trees_[t];
            std::int32_t cur = node_id;
            while (!nodes[cur].is_leaf()) {
                const KdNode& nd = nodes[cur];
                double diff = static_cast<double>(q[nd.split_dim]) -
                              static_cast<double>(nd.split_val);
                std::int32_t near_child = diff < 0.0 ? nd.left : nd.right;
                std::int32_t far_child = diff < 0.0 ? nd.right : nd.left;
                double far_bound = bound + diff * diff;
                if (!(best.size() == k && far_bound > best.top().first))
                    frontier.push({far_bound, {t, far_child}});
                cur = near_child;
            }
            const KdNode& leaf = nodes[cur];
            for (std::uint32_t p = leaf.begin; p < leaf.end; ++p) {
                std::uint32_t idx = order_[t][p];
                if (idx == self || visit_stamp[idx] == stamp) continue;
                visit_stamp[idx] = stamp;
                double dist = sqdist(q, ds_.row(idx), ds_.d);
                ++scored;
                if (best.size() < k) {
                    best.push({dist, idx});
                } else if (dist < best.top().first ||
                           (dist == best.top().first && idx < best.top().second)) {
                    best.pop();
                    best.push({dist, idx});
                }
                if (scored >= checks) break;
            }
        }

        std::vector<std::pair<double, std::size_t>> hits;
        hits.reserve(best.size());
        while (!best.empty()) {
            hits.push_back(best.top());
            best.pop();
        }
        std::sort(hits.begin(), hits.end());
        std::vector<std::size_t> out;
        out.reserve(hits.size());
        for (auto& h : hits) out.push_back(h.second);
        return out;
    }

private:
    void build(int tree, std::uint32_t begin, std::uint32_t end, RngStream& rng) {
        auto& nodes = trees_[tree];
        nodes.push_back(KdNode{});
        std::int32_t id = static_cast<std::int32_t>(nodes.size() - 1);
        if (end - begin <= leaf_size_) {
            nodes[id].begin = begin;
            nodes[id].end = end;
            return;
        }
        auto& order = order_[tree];

        // pick a split dim at random among the 5 highest-variance dims
        std::size_t d = ds_.d;
        std::vector<double> mean(d, 0.0), var(d, 0.0);
        for (std::uint32_t p = begin; p < end; ++p) {
            const float* row = ds_.row(order[p]);
            for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
        }
        double inv = 1.0 / static_cast<double>(end - begin);
        for (std::size_t j = 0; j < d; ++j) mean[j] *= inv;
        for (std::uint32_t p = begin; p < end; ++p) {
            const float* row = ds_.row(order[p]);
            for (std::size_t j = 0; j < d; ++j) {
                double diff = row[j] - mean[j];
                var[j] += diff * diff;
            }
        }
        std::vector<std::size_t> dims(d);
        std::iota(dims.begin(), dims.end(), 0u);
        std::size_t top = std::min<std::size_t>(5, d);
        std::partial_sort(dims.begin(), dims.begin() + static_cast<std::ptrdiff_t>(top),
                          dims.end(),
                          [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
        std::size_t split_dim = dims[rng.uniform_below(top)];
        float split_val = static_cast<float>(mean[split_dim]);

        auto mid_it = std::partition(order.begin() + begin, order.begin() + end,
                                     [&](std::uint32_t idx) {
                                         return ds_.row(idx)[split_dim] < split_val;
                                     });
        std::uint32_t mid = static_cast<std::uint32_t>(mid_it - order.begin());
        if (mid == begin || mid == end) mid = begin + (end - begin) / 2; // degenerate data

        nodes[id].split_dim = static_cast<int>(split_dim);
        nodes[id].split_val = split_val;
        std::int32_t left = static_cast<std::int32_t>(nodes.size());
        nodes[id].left = left;
        build(tree, begin, mid, rng);
        nodes[id].right = static_cast<std::int32_t>(nodes.size());
        build(tree, mid, end, rng);
    }

    const FeatureDataset& ds_;
    std::size_t leaf_size_;
    std::vector<std::vector<KdNode>> trees_;
    std::vector<std::vector<std::uint32_t>> order_;
};

SparseGraph rows_to_csr(std::size_t n, const std::vector<std::vector<std::size_t>>& rows) {
    SparseGraph g;
    g.n = n;
    g.row_offsets.resize(n + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        nnz += rows[i].size();
        g.row_offsets[i + 1] = nnz;
    }
    g.cols.reserve(nnz);
    g.values.reserve(nnz);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> sorted = rows[i];
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j : sorted) {
            g.cols.push_back(j);
            g.values.push_back(1.0f);
        }
    }
    return g;
}

void parallel_rows(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

SparseGraph knn_graph(const FeatureDataset& ds, std::size_t k, const KnnOptions& opts,
                      std::uint64_t seed) {
    if (ds.n() < 2) throw ParamError("knn_graph: need at least 2 nodes");
    if (k < 1 || k >= ds.n())
        throw ParamError("knn_graph: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                         ", n=" + std::to_string(ds.n()) + ")");
    for (float f : ds.features)
        if (!std::isfinite(f)) throw DataError("knn_graph: non-finite feature");

    std::size_t n = ds.n();
    std::vector<std::vector<std::size_t>> rows(n);
    if (opts.method == KnnMethod::Exact) {
        parallel_rows(n, opts.threads, [&](std::size_t i) {
            rows[i] = exact_neighbors(ds, ds.row(i), i, k);
        });
    } else {
        KdForest forest(ds, opts, seed);
        int checks = std::max<int>(opts.checks, static_cast<int>(k));
        // per-thread visit stamps; rows are independent
        int threads = std::max(1, opts.threads);
        if (threads <= 1 || n < 64) {
            std::vector<std::uint32_t> stamps(n, 0);
            std::uint32_t stamp = 0;
            for (std::size_t i = 0; i < n; ++i) {
                auto found = forest.search(ds.row(i), i, k, checks, stamps, ++stamp);
                // top up from an exact scan only if the budget starved the row
                if (found.size() < k) found = exact_neighbors(ds, ds.row(i), i, k);
                rows[i] = std::move(found);
            }
        } else {
            std::vector<std::thread> pool;
            std::size_t workers = std::min<std::size_t>(threads, n);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w]() {
                    std::vector<std::uint32_t> stamps(n, 0);
                    std::uint32_t stamp = 0;
                    for (std::size_t i = w; i < n; i += workers) {
                        auto found = forest.search(ds.row(i), i, k, checks, stamps, ++stamp);
                        if (found.size() < k) found = exact_neighbors(ds, ds.row(i), i, k);
                        rows[i] = std::move(found);
                    }
                });
            }
            for (auto& t : pool) t.join();
        }
    }
    SparseGraph g = rows_to_csr(n, rows);
    g.validate();
    return g;
}

SparseGraph symmetrize(const SparseGraph& g) {
    g.validate();
    // union of edges and reverses, elementwise max weight
    std::vector<std::vector<std::pair<std::size_t, float>>> rows(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            std::size_t j = g.cols[e];
            float w = g.values[e];
            rows[i].emplace_back(j, w);
            rows[j].emplace_back(i, w);
        }
    }
    SparseGraph out;
    out.n = g.n;
    out.row_offsets.resize(g.n + 1, 0);
    for (std::size_t i = 0; i < g.n; ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        std::size_t w = 0;
        for (std::size_t r = 0; r < row.size(); ++r) {
            if (w > 0 && row[w - 1].first == row[r].first) {
                row[w - 1].second = std::max(row[w - 1].second, row[r].second);
            } else {
                row[w++] = row[r];
            }
        }
        row.resize(w);
        out.row_offsets[i + 1] = out.row_offsets[i] + w;
    }
    out.cols.reserve(out.row_offsets[g.n]);
    out.values.reserve(out.row_offsets[g.n]);
    for (auto& row : rows)
        for (auto& [j, w] : row) {
            out.cols.push_back(j);
            out.values.push_back(w);
        }
    out.validate();
    return out;
}

SparseGraph with_self_loops(const SparseGraph& g) {
    SparseGraph out;
    out.n = g.n;
    out.row_offsets.assign(g.n + 1, 0);
    for (std::size_t i = 0; i < g.n; ++i) {
        bool has_loop = g.has_edge(i, i);
        out.row_offsets[i + 1] =
            out.row_offsets[i] + (g.row_offsets[i + 1] - g.row_offsets[i]) + (has_loop ? 0 : 1);
    }
    out.cols.reserve(out.row_offsets[g.n]);
    out.values.reserve(out.row_offsets[g.n]);
    for (std::size_t i = 0; i < g.n; ++i) {
        bool inserted = false;
        for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            std::size_t j = g.cols[e];
            if (!inserted && j > i) {
                out.cols.push_back(i);
                out.values.push_back(1.0f);
                inserted = true;
            }
            if (j == i) inserted = true;
            out.cols.push_back(j);
            out.values.push_back(j == i ? 1.0f : g.values[e]);
        }
        if (!inserted) {
            out.cols.push_back(i);
            out.values.push_back(1.0f);
        }
    }
    out.validate();
    return out;
}

NormalizedAdjacency normalize(const SparseGraph& g) {
    g.validate();
    if (!g.is_symmetric()) throw ParamError("normalize: input graph must be symmetric");
    SparseGraph tilde = with_self_loops(g);

    std::vector<double> degree(tilde.n, 0.0);
    for (std::size_t i = 0; i < tilde.n; ++i)
        for (std::uint64_t e = tilde.row_offsets[i]; e < tilde.row_offsets[i + 1]; ++e)
            degree[i] += static_cast<double>(tilde.values[e]);

    NormalizedAdjacency norm;
    norm.n = tilde.n;
    norm.row_offsets = tilde.row_offsets;
    norm.cols = tilde.cols;
    norm.values.resize(tilde.values.size());
    for (std::size_t i = 0; i < tilde.n; ++i) {
        for (std::uint64_t e = tilde.row_offsets[i]; e < tilde.row_offsets[i + 1]; ++e) {
            std::size_t j = tilde.cols[e];
            norm.values[e] = static_cast<double>(tilde.values[e]) /
                             std::sqrt(degree[i] * degree[j]);
        }
    }
    return norm;
}

std::pair<SparseGraph, std::size_t> attach_query(const SparseGraph& g, const FeatureDataset& ds,
                                                 const std::vector<float>& q, std::size_t k) {
    g.validate();
    if (g.n != ds.n()) throw ParamError("attach_query: graph/dataset node count mismatch");
    if (q.size() != ds.d)
        throw ParamError("attach_query: query dimension " + std::to_string(q.size()) +
                         " != dataset dimension " + std::to_string(ds.d));
    if (k < 1 || k > g.n) throw ParamError("attach_query: k must satisfy 1 <= k <= n");

    std::vector<std::size_t> neighbors = exact_neighbors(ds, q.data(), ds.n(), k);
    std::sort(neighbors.begin(), neighbors.end());
    std::vector<bool> is_neighbor(g.n, false);
    for (std::size_t j : neighbors) is_neighbor[j] = true;

    std::size_t qi = g.n;
    SparseGraph out;
    out.n = g.n + 1;
    out.row_offsets.resize(out.n + 1, 0);
    for (std::size_t i = 0; i < g.n; ++i)
        out.row_offsets[i + 1] = out.row_offsets[i] + (g.row_offsets[i + 1] - g.row_offsets[i]) +
                                 (is_neighbor[i] ? 1 : 0);
    out.row_offsets[out.n] = out.row_offsets[g.n] + k;
    out.cols.reserve(out.row_offsets[out.n]);
    out.values.reserve(out.row_offsets[out.n]);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            out.cols.push_back(g.cols[e]);
            out.values.push_back(g.values[e]);
        }
        if (is_neighbor[i]) {
            out.cols.push_back(qi); // qi sorts after every existing column
            out.values.push_back(1.0f);
        }
    }
    for (std::size_t j : neighbors) {
        out.cols.push_back(j);
        out.values.push_back(1.0f);
    }
    out.validate();
    return {std::move(out), qi};
}

// ---- binary format (GRFG) ----

std::string serialize_graph(const SparseGraph& g) {
    g.validate();
    bin::Writer w;
    w.bytes("GRFG", 4);
    w.u32(1);
    w.u64(g.n);
    w.u64(g.nnz());
    for (std::uint64_t v : g.row_offsets) w.u64(v);
    for (std::uint64_t v : g.cols) w.u64(v);
    for (float v : g.values) w.f32(v);
    return w.take();
}

SparseGraph parse_graph(std::string_view bytes) {
    bin::Reader r(bytes);
    bin::expect_magic(r, "GRFG", "graph");
    std::uint32_t version = r.u32();
    if (version != 1) throw DataError("unsupported graph format version " + std::to_string(version));
    SparseGraph g;
    g.n = r.u64();
    std::uint64_t nnz = r.u64();
    g.row_offsets.resize(g.n + 1);
    for (auto& v : g.row_offsets) v = r.u64();
    g.cols.resize(nnz);
    for (auto& v : g.cols) v = r.u64();
    g.values.resize(nnz);
    for (auto& v : g.values) v = r.f32();
    g.validate();
    return g;
}

void save_graph(const SparseGraph& g, const std::string& path) {
    bin::write_file(path, serialize_graph(g));
}

SparseGraph load_graph(const std::string& path) { return parse_graph(bin::read_file(path)); }

void export_tsv(const SparseGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    char buf[64];
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::uint64_t e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(g.values[e]));
            out << i << '\t' << g.cols[e] << '\t' << buf << '\n';
        }
    }
    if (!out) throw DataError("write failure: " + path);
}

} // namespace grf
