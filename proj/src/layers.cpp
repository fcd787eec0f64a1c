#include "grf/layers.hpp"

#include "grf/error.hpp"

namespace grf {

TensorPtr batch_norm(Tape& tape, const TensorPtr& x, BatchNormState& bn, Mode mode,
                     bool update_running) {
    int n = x->rows, c = x->cols;
    if (bn.gamma->cols != c || bn.beta->cols != c)
        throw ParamError("batch_norm: gamma/beta width does not match input");

    TensorPtr mean, var;
    if (mode == Mode::Train) {
        mean = col_mean(tape, x);
        auto centered = sub(tape, x, bcast_rows(tape, mean, n));
        var = col_mean(tape, mul(tape, centered, centered));
        if (update_running) {
            double m = bn.momentum;
            // unbiased variance for the running estimate (biased when n == 1)
            double correction = n > 1 ? static_cast<double>(n) / (n - 1) : 1.0;
            for (int j = 0; j < c; ++j) {
                bn.running_mean->data[j] =
                    (1.0 - m) * bn.running_mean->data[j] + m * mean->data[j];
                bn.running_var->data[j] =
                    (1.0 - m) * bn.running_var->data[j] + m * var->data[j] * correction;
            }
        }
    } else {
        // snapshot the running stats as constants
        mean = make_tensor(1, c, bn.running_mean->data);
        var = make_tensor(1, c, bn.running_var->data);
    }

    auto centered = sub(tape, x, bcast_rows(tape, mean, n));
    auto inv_std = rsqrt_shifted(tape, var, bn.eps);
    auto xhat = mul(tape, centered, bcast_rows(tape, inv_std, n));
    auto scaled = mul(tape, xhat, bcast_rows(tape, bn.gamma, n));
    return add(tape, scaled, bcast_rows(tape, bn.beta, n));
}

TensorPtr linear(Tape& tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b) {
    auto out = matmul(tape, x, w);
    return add(tape, out, bcast_rows(tape, b, out->rows));
}

TensorPtr gcn_layer(Tape& tape, const NormalizedAdjacency& norm_adj, const TensorPtr& x,
                    const TensorPtr& w) {
    return matmul(tape, spmm(tape, norm_adj, x), w);
}

TensorPtr gat_layer(Tape& tape, const TensorPtr& x, const SparseGraph& adj,
                    const std::vector<GatHead>& heads, double slope,
                    std::vector<TensorPtr>* attn_out) {
    if (heads.empty()) throw ParamError("gat_layer: need at least one head");
    int n = x->rows;
    if (adj.n != static_cast<std::size_t>(n)) throw ParamError("gat_layer: graph/x row mismatch");

    // neighborhood mask with self-loops so every row has attention support
    auto mask = std::make_shared<std::vector<std::uint8_t>>(
        static_cast<std::size_t>(n) * n, std::uint8_t{0});
    for (std::size_t i = 0; i < adj.n; ++i) {
        (*mask)[i * n + i] = 1;
        for (std::uint64_t e = adj.row_offsets[i]; e < adj.row_offsets[i + 1]; ++e)
            (*mask)[i * n + adj.cols[e]] = 1;
    }

    TensorPtr out;
    for (const auto& head : heads) {
        auto h = matmul(tape, x, head.weight); // n x d_hidden
        auto score_src = matmul(tape, h, head.attn_src); // n x 1
        auto score_dst = matmul(tape, h, head.attn_dst); // n x 1
        // e_ij = src_i + dst_j
        auto scores = add(tape, bcast_cols(tape, score_src, n),
                          bcast_rows(tape, transpose(tape, score_dst), n));
        auto activated = leaky_relu(tape, scores, slope);
        auto alpha = row_softmax_masked(tape, activated, mask);
        if (attn_out) attn_out->push_back(alpha);
        auto aggregated = matmul(tape, alpha, h);
        out = out ? concat_cols(tape, out, aggregated) : aggregated;
    }
    return out;
}

} // namespace grf
