#pragma once

#include <vector>

#include "grf/tensor.hpp"

namespace grf {

// Per-feature batch normalization state. gamma/beta are trainable 1xC rows;
// the running stats feed eval mode only.
struct BatchNormState {
    TensorPtr gamma;
    TensorPtr beta;
    TensorPtr running_mean;
    TensorPtr running_var;
    double momentum = 0.1;
    double eps = 1e-5;
};

// Train mode normalizes with batch statistics (and optionally updates the
// running stats); eval mode normalizes with the running stats.
TensorPtr batch_norm(Tape& tape, const TensorPtr& x, BatchNormState& bn, Mode mode,
                     bool update_running);

TensorPtr linear(Tape& tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b);

// norm_adj * x * w; activation is the caller's business
TensorPtr gcn_layer(Tape& tape, const NormalizedAdjacency& norm_adj, const TensorPtr& x,
                    const TensorPtr& w);

struct GatHead {
    TensorPtr weight;   // d_in x d_hidden
    TensorPtr attn_src; // d_hidden x 1
    TensorPtr attn_dst; // d_hidden x 1
};

// Multi-head graph attention: e_ij = LeakyReLU(a_src'Wh_i + a_dst'Wh_j),
// alpha = softmax over the neighborhood (self-loops added internally),
// out = concat over heads of alpha * (X W_h).
// If attn_out is non-null it receives the per-head coefficient matrices.
TensorPtr gat_layer(Tape& tape, const TensorPtr& x, const SparseGraph& adj,
                    const std::vector<GatHead>& heads, double slope,
                    std::vector<TensorPtr>* attn_out = nullptr);

} // namespace grf
