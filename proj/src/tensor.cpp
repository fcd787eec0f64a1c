#include "grf/tensor.hpp"

#include <cmath>
#include <string>

#include "grf/error.hpp"

namespace grf {

void Tensor2::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor2::zero_grad() { grad.assign(data.size(), 0.0); }

TensorPtr make_tensor(int rows, int cols, double fill, bool requires_grad) {
    auto t = std::make_shared<Tensor2>(rows, cols, fill);
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr make_tensor(int rows, int cols, std::vector<double> values, bool requires_grad) {
    if (values.size() != static_cast<std::size_t>(rows) * cols)
        throw ParamError("make_tensor: value count does not match shape");
    auto t = std::make_shared<Tensor2>();
    t->rows = rows;
    t->cols = cols;
    t->data = std::move(values);
    t->requires_grad = requires_grad;
    return t;
}

void Tape::backward(const TensorPtr& root) {
    if (root->rows != 1 || root->cols != 1)
        throw ParamError("Tape::backward: root must be a 1x1 scalar");
    root->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

void check_finite(const Tensor2& t, const char* op) {
    for (double v : t.data)
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite value produced by ") + op);
}

namespace {

void check_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->rows != b->rows || a->cols != b->cols)
        throw ParamError(std::string(op) + ": shape mismatch (" + std::to_string(a->rows) + "x" +
                         std::to_string(a->cols) + " vs " + std::to_string(b->rows) + "x" +
                         std::to_string(b->cols) + ")");
}

// true when the closure found gradient to propagate
inline bool has_grad(const TensorPtr& t) { return !t->grad.empty(); }

} // namespace

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->cols != b->rows)
        throw ParamError("matmul: inner dimensions differ (" + std::to_string(a->cols) + " vs " +
                         std::to_string(b->rows) + ")");
    int n = a->rows, k = a->cols, m = b->cols;
    auto out = make_tensor(n, m);
    const double* ap = a->data.data();
    const double* bp = b->data.data();
    double* op = out->data.data();
    for (int i = 0; i < n; ++i) {
        const double* arow = ap + static_cast<std::size_t>(i) * k;
        double* orow = op + static_cast<std::size_t>(i) * m;
        for (int kk = 0; kk < k; ++kk) {
            double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = bp + static_cast<std::size_t>(kk) * m;
            for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    check_finite(*out, "matmul");
    out->requires_grad = a->requires_grad || b->requires_grad;
    if (out->requires_grad) {
        tape.record([a, b, out, n, k, m]() {
            if (!has_grad(out)) return;
            const double* g = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                double* ga = a->grad.data();
                const double* bp2 = b->data.data();
                for (int i = 0; i < n; ++i) {
                    const double* grow = g + static_cast<std::size_t>(i) * m;
                    double* garow = ga + static_cast<std::size_t>(i) * k;
                    for (int kk = 0; kk < k; ++kk) {
                        const double* brow = bp2 + static_cast<std::size_t>(kk) * m;
                        double s = 0.0;
                        for (int j = 0; j < m; ++j) s += grow[j] * brow[j];
                        garow[kk] += s;
                    }
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                double* gb = b->grad.data();
                const double* ap2 = a->data.data();
                for (int kk = 0; kk < k; ++kk) {
                    double* gbrow = gb + static_cast<std::size_t>(kk) * m;
                    for (int i = 0; i < n; ++i) {
                        double av = ap2[static_cast<std::size_t>(i) * k + kk];
                        if (av == 0.0) continue;
                        const double* grow = g + static_cast<std::size_t>(i) * m;
                        for (int j = 0; j < m; ++j) gbrow[j] += av * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "add");
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] + b->data[i];
    check_finite(*out, "add");
    out->requires_grad = a->requires_grad || b->requires_grad;
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            if (!has_grad(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "sub");
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] - b->data[i];
    check_finite(*out, "sub");
    out->requires_grad = a->requires_grad || b->requires_grad;
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            if (!has_grad(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i) b->grad[i] -= out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "mul");
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] * b->data[i];
    check_finite(*out, "mul");
    out->requires_grad = a->requires_grad || b->requires_grad;
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            if (!has_grad(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    a->grad[i] += out->grad[i] * b->data[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < out->grad.size(); ++i)
                    b->grad[i] += out->grad[i] * a->data[i];
            }
        });
    }
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& a, double s) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] * s;
    check_finite(*out, "scale");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out, s]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += s * out->grad[i];
        });
    }
    return out;
}

TensorPtr add_scalar(Tape& tape, const TensorPtr& a, double s) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] + s;
    check_finite(*out, "add_scalar");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) a->grad[i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr transpose(Tape& tape, const TensorPtr& a) {
    auto out = make_tensor(a->cols, a->rows);
    for (int i = 0; i < a->rows; ++i)
        for (int j = 0; j < a->cols; ++j) out->at(j, i) = a->at(i, j);
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (int i = 0; i < a->rows; ++i)
                for (int j = 0; j < a->cols; ++j)
                    a->grad[static_cast<std::size_t>(i) * a->cols + j] +=
                        out->grad[static_cast<std::size_t>(j) * out->cols + i];
        });
    }
    return out;
}

TensorPtr concat_cols(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->rows != b->rows) throw ParamError("concat_cols: row counts differ");
    int n = a->rows, p = a->cols, q = b->cols;
    auto out = make_tensor(n, p + q);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) out->at(i, j) = a->at(i, j);
        for (int j = 0; j < q; ++j) out->at(i, p + j) = b->at(i, j);
    }
    out->requires_grad = a->requires_grad || b->requires_grad;
    if (out->requires_grad) {
        tape.record([a, b, out, n, p, q]() {
            if (!has_grad(out)) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < p; ++j)
                        a->grad[static_cast<std::size_t>(i) * p + j] +=
                            out->grad[static_cast<std::size_t>(i) * (p + q) + j];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < q; ++j)
                        b->grad[static_cast<std::size_t>(i) * q + j] +=
                            out->grad[static_cast<std::size_t>(i) * (p + q) + p + j];
            }
        });
    }
    return out;
}

TensorPtr bcast_rows(Tape& tape, const TensorPtr& row_vec, int n) {
    if (row_vec->rows != 1) throw ParamError("bcast_rows: input must be 1xC");
    int c = row_vec->cols;
    auto out = make_tensor(n, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out->at(i, j) = row_vec->data[j];
    out->requires_grad = row_vec->requires_grad;
    if (out->requires_grad) {
        tape.record([row_vec, out, n, c]() {
            if (!has_grad(out)) return;
            row_vec->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j)
                    row_vec->grad[j] += out->grad[static_cast<std::size_t>(i) * c + j];
        });
    }
    return out;
}

TensorPtr bcast_cols(Tape& tape, const TensorPtr& col_vec, int c) {
    if (col_vec->cols != 1) throw ParamError("bcast_cols: input must be Nx1");
    int n = col_vec->rows;
    auto out = make_tensor(n, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out->at(i, j) = col_vec->data[i];
    out->requires_grad = col_vec->requires_grad;
    if (out->requires_grad) {
        tape.record([col_vec, out, n, c]() {
            if (!has_grad(out)) return;
            col_vec->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j)
                    col_vec->grad[i] += out->grad[static_cast<std::size_t>(i) * c + j];
        });
    }
    return out;
}

TensorPtr col_mean(Tape& tape, const TensorPtr& a) {
    int n = a->rows, c = a->cols;
    auto out = make_tensor(1, c);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out->data[j] += a->at(i, j);
    double inv = 1.0 / n;
    for (int j = 0; j < c; ++j) out->data[j] *= inv;
    check_finite(*out, "col_mean");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out, n, c, inv]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j)
                    a->grad[static_cast<std::size_t>(i) * c + j] += inv * out->grad[j];
        });
    }
    return out;
}

TensorPtr sum_all(Tape& tape, const TensorPtr& a) {
    auto out = make_tensor(1, 1);
    double s = 0.0;
    for (double v : a->data) s += v;
    out->data[0] = s;
    check_finite(*out, "sum_all");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            double g = out->grad[0];
            for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g;
        });
    }
    return out;
}

TensorPtr leaky_relu(Tape& tape, const TensorPtr& a, double slope) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) {
        double x = a->data[i];
        out->data[i] = x > 0.0 ? x : slope * x;
    }
    check_finite(*out, "leaky_relu");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out, slope]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                a->grad[i] += out->grad[i] * (a->data[i] > 0.0 ? 1.0 : slope);
        });
    }
    return out;
}

TensorPtr sigmoid(Tape& tape, const TensorPtr& a) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) {
        double x = a->data[i];
        if (x >= 0.0) {
            out->data[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
            double e = std::exp(x);
            out->data[i] = e / (1.0 + e);
        }
    }
    check_finite(*out, "sigmoid");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double y = out->data[i];
                a->grad[i] += out->grad[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

TensorPtr exp_elem(Tape& tape, const TensorPtr& a) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = std::exp(a->data[i]);
    check_finite(*out, "exp");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                a->grad[i] += out->grad[i] * out->data[i];
        });
    }
    return out;
}

TensorPtr square(Tape& tape, const TensorPtr& a) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = a->data[i] * a->data[i];
    check_finite(*out, "square");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                a->grad[i] += 2.0 * a->data[i] * out->grad[i];
        });
    }
    return out;
}

TensorPtr rsqrt_shifted(Tape& tape, const TensorPtr& a, double eps) {
    auto out = make_tensor(a->rows, a->cols);
    for (std::size_t i = 0; i < a->size(); ++i) out->data[i] = 1.0 / std::sqrt(a->data[i] + eps);
    check_finite(*out, "rsqrt");
    out->requires_grad = a->requires_grad;
    if (out->requires_grad) {
        tape.record([a, out]() {
            if (!has_grad(out)) return;
            a->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i) {
                double y = out->data[i];
                a->grad[i] += -0.5 * y * y * y * out->grad[i];
            }
        });
    }
    return out;
}

namespace {

template <typename ValueT>
TensorPtr spmm_impl(Tape& tape, std::size_t n, const std::vector<std::uint64_t>& row_offsets,
                    const std::vector<std::uint64_t>& cols, const std::vector<ValueT>& values,
                    const TensorPtr& x) {
    if (x->rows != static_cast<int>(n)) throw ParamError("spmm: adjacency/x row mismatch");
    int c = x->cols;
    auto out = make_tensor(static_cast<int>(n), c);
    for (std::size_t i = 0; i < n; ++i) {
        double* orow = out->data.data() + i * c;
        for (std::uint64_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
            double v = static_cast<double>(values[e]);
            const double* xrow = x->data.data() + cols[e] * c;
            for (int j = 0; j < c; ++j) orow[j] += v * xrow[j];
        }
    }
    check_finite(*out, "spmm");
    out->requires_grad = x->requires_grad;
    if (out->requires_grad) {
        tape.record([&row_offsets, &cols, &values, x, out, n, c]() {
            if (!has_grad(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const double* grow = out->grad.data() + i * c;
                for (std::uint64_t e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
                    double v = static_cast<double>(values[e]);
                    double* gxrow = x->grad.data() + cols[e] * c;
                    for (int j = 0; j < c; ++j) gxrow[j] += v * grow[j];
                }
            }
        });
    }
    return out;
}

} // namespace

TensorPtr spmm(Tape& tape, const NormalizedAdjacency& adj, const TensorPtr& x) {
    return spmm_impl(tape, adj.n, adj.row_offsets, adj.cols, adj.values, x);
}

TensorPtr spmm(Tape& tape, const SparseGraph& adj, const TensorPtr& x) {
    return spmm_impl(tape, adj.n, adj.row_offsets, adj.cols, adj.values, x);
}

TensorPtr row_softmax_masked(Tape& tape, const TensorPtr& logits, const MaskPtr& mask) {
    int n = logits->rows, m = logits->cols;
    if (mask->size() != logits->size()) throw ParamError("row_softmax_masked: mask shape mismatch");
    auto out = make_tensor(n, m);
    for (int i = 0; i < n; ++i) {
        const double* lrow = logits->data.data() + static_cast<std::size_t>(i) * m;
        const std::uint8_t* mrow = mask->data() + static_cast<std::size_t>(i) * m;
        double* orow = out->data.data() + static_cast<std::size_t>(i) * m;
        double mx = -1e300;
        bool any = false;
        for (int j = 0; j < m; ++j)
            if (mrow[j]) {
                any = true;
                if (lrow[j] > mx) mx = lrow[j];
            }
        if (!any)
            throw NumericError("row_softmax_masked: fully masked row " + std::to_string(i));
        double denom = 0.0;
        for (int j = 0; j < m; ++j)
            if (mrow[j]) {
                orow[j] = std::exp(lrow[j] - mx);
                denom += orow[j];
            }
        for (int j = 0; j < m; ++j)
            if (mrow[j]) orow[j] /= denom;
    }
    check_finite(*out, "row_softmax_masked");
    out->requires_grad = logits->requires_grad;
    if (out->requires_grad) {
        tape.record([logits, mask, out, n, m]() {
            if (!has_grad(out)) return;
            logits->ensure_grad();
            for (int i = 0; i < n; ++i) {
                const double* y = out->data.data() + static_cast<std::size_t>(i) * m;
                const double* g = out->grad.data() + static_cast<std::size_t>(i) * m;
                const std::uint8_t* mrow = mask->data() + static_cast<std::size_t>(i) * m;
                double* gl = logits->grad.data() + static_cast<std::size_t>(i) * m;
                double dot = 0.0;
                for (int j = 0; j < m; ++j)
                    if (mrow[j]) dot += g[j] * y[j];
                for (int j = 0; j < m; ++j)
                    if (mrow[j]) gl[j] += y[j] * (g[j] - dot);
            }
        });
    }
    return out;
}

TensorPtr dropout(Tape& tape, const TensorPtr& x, double p, RngStream& rng, Mode mode) {
    if (p < 0.0 || p >= 1.0) throw ParamError("dropout: p must lie in [0, 1)");
    if (mode == Mode::Eval || p == 0.0) return x;
    auto keep = std::make_shared<std::vector<double>>(x->size());
    double inv_keep = 1.0 / (1.0 - p);
    auto out = make_tensor(x->rows, x->cols);
    for (std::size_t i = 0; i < x->size(); ++i) {
        double m = rng.uniform() < p ? 0.0 : inv_keep;
        (*keep)[i] = m;
        out->data[i] = x->data[i] * m;
    }
    check_finite(*out, "dropout");
    out->requires_grad = x->requires_grad;
    if (out->requires_grad) {
        tape.record([x, out, keep]() {
            if (!has_grad(out)) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < out->grad.size(); ++i)
                x->grad[i] += out->grad[i] * (*keep)[i];
        });
    }
    return out;
}

TensorPtr bce_logits_mean(Tape& tape, const TensorPtr& logits, double target) {
    if (target != 0.0 && target != 1.0) throw ParamError("bce_logits_mean: target must be 0 or 1");
    auto softplus = [](double x) {
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    };
    auto out = make_tensor(1, 1);
    double s = 0.0;
    for (double l : logits->data) s += target == 1.0 ? softplus(-l) : softplus(l);
    double inv = 1.0 / static_cast<double>(logits->size());
    out->data[0] = s * inv;
    check_finite(*out, "bce_logits_mean");
    out->requires_grad = logits->requires_grad;
    if (out->requires_grad) {
        tape.record([logits, out, target, inv]() {
            if (!has_grad(out)) return;
            logits->ensure_grad();
            double g = out->grad[0] * inv;
            for (std::size_t i = 0; i < logits->size(); ++i) {
                double l = logits->data[i];
                double sig = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l))
                                      : std::exp(l) / (1.0 + std::exp(l));
                logits->grad[i] += g * (sig - target);
            }
        });
    }
    return out;
}

} // namespace grf
