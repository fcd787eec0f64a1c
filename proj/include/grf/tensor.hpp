#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "grf/graph.hpp"
#include "grf/rng.hpp"

namespace grf {

enum class Mode { Train, Eval };

// Dense row-major matrix of doubles with an optional gradient buffer.
// All forward ops validate their outputs for NaN/inf so overflow surfaces
// as a NumericError instead of propagating silently.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;

    Tensor2() = default;
    Tensor2(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }

    void ensure_grad();
    void zero_grad();
};

using TensorPtr = std::shared_ptr<Tensor2>;

TensorPtr make_tensor(int rows, int cols, double fill = 0.0, bool requires_grad = false);
TensorPtr make_tensor(int rows, int cols, std::vector<double> values, bool requires_grad = false);

// Reverse-mode tape: ops append backward closures during the forward pass;
// backward() replays them newest-first. One tape per training step.
class Tape {
public:
    void record(std::function<void()> op) { ops_.push_back(std::move(op)); }

    // root must be 1x1; seeds its grad with 1 and replays the tape.
    void backward(const TensorPtr& root);

    void clear() { ops_.clear(); }
    std::size_t num_ops() const { return ops_.size(); }

private:
    std::vector<std::function<void()>> ops_;
};

// ---- primitive ops (forward + recorded backward) ----

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape& tape, const TensorPtr& a, double s);
TensorPtr add_scalar(Tape& tape, const TensorPtr& a, double s);
TensorPtr transpose(Tape& tape, const TensorPtr& a);
TensorPtr concat_cols(Tape& tape, const TensorPtr& a, const TensorPtr& b);

// replicate a 1xC row (or Nx1 column) across n rows / c cols
TensorPtr bcast_rows(Tape& tape, const TensorPtr& row_vec, int n);
TensorPtr bcast_cols(Tape& tape, const TensorPtr& col_vec, int c);

TensorPtr col_mean(Tape& tape, const TensorPtr& a); // 1 x C
TensorPtr sum_all(Tape& tape, const TensorPtr& a);  // 1 x 1

TensorPtr leaky_relu(Tape& tape, const TensorPtr& a, double slope);
TensorPtr sigmoid(Tape& tape, const TensorPtr& a);
TensorPtr exp_elem(Tape& tape, const TensorPtr& a);
TensorPtr square(Tape& tape, const TensorPtr& a);
// elementwise 1/sqrt(x + eps)
TensorPtr rsqrt_shifted(Tape& tape, const TensorPtr& a, double eps);

// sparse (CSR) times dense; adjacency values are constants
TensorPtr spmm(Tape& tape, const NormalizedAdjacency& adj, const TensorPtr& x);
TensorPtr spmm(Tape& tape, const SparseGraph& adj, const TensorPtr& x);

using MaskPtr = std::shared_ptr<std::vector<std::uint8_t>>;

// Softmax per row over mask-allowed entries; disallowed entries are 0.
// A fully masked row is a degeneracy error.
TensorPtr row_softmax_masked(Tape& tape, const TensorPtr& logits, const MaskPtr& mask);

// Inverted dropout: train mode zeroes with probability p and scales
// survivors by 1/(1-p); eval mode (or p == 0) is the identity.
TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, RngStream& rng, Mode mode);

// mean over entries of BCE-with-logits against a constant 0/1 target
TensorPtr bce_logits_mean(Tape& tape, const TensorPtr& logits, double target);

// throws NumericError naming `op` if any entry is NaN/inf
void check_finite(const Tensor2& t, const char* op);

} // namespace grf
