#include "grf/model.hpp"

#include <algorithm>
#include <cmath>

#include "grf/binio.hpp"
#include "grf/error.hpp"

namespace grf {

Variant variant_from_name(const std::string& name) {
    if (name == "gae") return Variant::Gae;
    if (name == "vgae") return Variant::Vgae;
    if (name == "arvga") return Variant::Arvga;
    if (name == "a-arvgae") return Variant::AArvgae;
    throw ParamError("unknown variant: '" + name + "' (expected gae|vgae|arvga|a-arvgae)");
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Gae: return "gae";
        case Variant::Vgae: return "vgae";
        case Variant::Arvga: return "arvga";
        default: return "a-arvgae";
    }
}

void ModelConfig::apply_variant(Variant v) {
    use_attention = (v == Variant::AArvgae);
    variational = (v != Variant::Gae);
    adversarial = (v == Variant::Arvga || v == Variant::AArvgae);
}

Variant ModelConfig::variant() const {
    if (use_attention) return Variant::AArvgae;
    if (adversarial) return Variant::Arvga;
    if (variational) return Variant::Vgae;
    return Variant::Gae;
}

void ModelConfig::validate() const {
    if (d_in < 1 || d_hidden < 1 || heads < 1 || d_latent < 1 || disc_hidden < 1)
        throw ParamError("model config: dimensions must be >= 1");
    if (dropout_p < 0.0 || dropout_p >= 1.0)
        throw ParamError("model config: dropout must lie in [0, 1)");
    if (!(lr > 0.0)) throw ParamError("model config: lr must be > 0");
    // only the four named flag combinations are meaningful
    if (use_attention && (!variational || !adversarial))
        throw ParamError("model config: attention variant requires variational+adversarial");
    if (adversarial && !variational)
        throw ParamError("model config: adversarial training requires the variational encoder");
}

TensorPtr ModelParams::find(const std::string& name) const {
    for (const auto& [n, t] : trainable)
        if (n == name) return t;
    for (const auto& [n, t] : buffers)
        if (n == name) return t;
    return nullptr;
}

TensorPtr ModelParams::get(const std::string& name) const {
    auto t = find(name);
    if (!t) throw ParamError("unknown parameter: '" + name + "'");
    return t;
}

void ModelParams::set_requires_grad(const std::string& prefix, bool value) {
    for (auto& [n, t] : trainable)
        if (n.rfind(prefix, 0) == 0) t->requires_grad = value;
}

void ModelParams::zero_grads() {
    for (auto& [n, t] : trainable) t->zero_grad();
}

namespace {

TensorPtr glorot(int rows, int cols, RngStream& rng) {
    double limit = std::sqrt(6.0 / (rows + cols));
    auto t = make_tensor(rows, cols, 0.0, true);
    for (auto& v : t->data) v = (2.0 * rng.uniform() - 1.0) * limit;
    return t;
}

// first-layer output width is heads * d_hidden for every variant so the
// GCN heads and discriminator keep identical shapes across the ablation
std::size_t hidden_width(const ModelConfig& cfg) { return cfg.heads * cfg.d_hidden; }

BatchNormState bn_state(ModelParams& params, const ModelConfig& cfg, const std::string& prefix) {
    BatchNormState bn;
    bn.gamma = params.get(prefix + ".gamma");
    bn.beta = params.get(prefix + ".beta");
    bn.running_mean = params.get(prefix + ".running_mean");
    bn.running_var = params.get(prefix + ".running_var");
    bn.momentum = cfg.bn_momentum;
    bn.eps = cfg.bn_eps;
    return bn;
}

} // namespace

ModelParams init_params(const ModelConfig& cfg, RngStream& rng) {
    cfg.validate();
    ModelParams p;
    int din = static_cast<int>(cfg.d_in);
    int dh = static_cast<int>(cfg.d_hidden);
    int width = static_cast<int>(hidden_width(cfg));
    int dz = static_cast<int>(cfg.d_latent);
    int dd = static_cast<int>(cfg.disc_hidden);

    auto push = [&p](const std::string& name, TensorPtr t) {
        p.trainable.emplace_back(name, std::move(t));
    };
    auto push_buffer = [&p](const std::string& name, TensorPtr t) {
        t->requires_grad = false;
        p.buffers.emplace_back(name, std::move(t));
    };

    if (cfg.use_attention) {
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            std::string base = "gat.h" + std::to_string(h);
            push(base + ".weight", glorot(din, dh, rng));
            push(base + ".attn_src", glorot(dh, 1, rng));
            push(base + ".attn_dst", glorot(dh, 1, rng));
        }
        push("enc.bn.gamma", make_tensor(1, width, 1.0, true));
        push("enc.bn.beta", make_tensor(1, width, 0.0, true));
        push_buffer("enc.bn.running_mean", make_tensor(1, width, 0.0));
        push_buffer("enc.bn.running_var", make_tensor(1, width, 1.0));
    } else {
        push("enc.gcn1.weight", glorot(din, width, rng));
    }
    push("enc.mu.weight", glorot(width, dz, rng));
    push("enc.logvar.weight", glorot(width, dz, rng));

    push("disc.fc1.weight", glorot(dz, dd, rng));
    push("disc.fc1.bias", make_tensor(1, dd, 0.0, true));
    push("disc.bn.gamma", make_tensor(1, dd, 1.0, true));
    push("disc.bn.beta", make_tensor(1, dd, 0.0, true));
    push_buffer("disc.bn.running_mean", make_tensor(1, dd, 0.0));
    push_buffer("disc.bn.running_var", make_tensor(1, dd, 1.0));
    push("disc.fc2.weight", glorot(dd, 1, rng));
    push("disc.fc2.bias", make_tensor(1, 1, 0.0, true));
    return p;
}

TensorPtr reparameterize(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar,
                         RngStream& rng) {
    if (mu->rows != logvar->rows || mu->cols != logvar->cols)
        throw ParamError("reparameterize: mu/logvar shape mismatch");
    auto eps = make_tensor(mu->rows, mu->cols);
    for (auto& v : eps->data) v = rng.normal();
    auto std_dev = exp_elem(tape, scale(tape, logvar, 0.5));
    return add(tape, mu, mul(tape, std_dev, eps));
}

LatentState encode(Tape& tape, ModelParams& params, const ModelConfig& cfg, const TensorPtr& x,
                   const SparseGraph& adj, const NormalizedAdjacency& norm_adj, RngStream& rng,
                   Mode mode) {
    if (x->cols != static_cast<int>(cfg.d_in))
        throw ParamError("encode: feature width " + std::to_string(x->cols) +
                         " != config d_in " + std::to_string(cfg.d_in));

    TensorPtr h;
    if (cfg.use_attention) {
        std::vector<GatHead> heads;
        for (std::size_t k = 0; k < cfg.heads; ++k) {
            std::string base = "gat.h" + std::to_string(k);
            heads.push_back({params.get(base + ".weight"), params.get(base + ".attn_src"),
                             params.get(base + ".attn_dst")});
        }
        h = gat_layer(tape, x, adj, heads, cfg.attn_slope);
        auto bn = bn_state(params, cfg, "enc.bn");
        h = batch_norm(tape, h, bn, mode, mode == Mode::Train);
        h = leaky_relu(tape, h, cfg.act_slope);
        h = dropout(tape, h, cfg.dropout_p, rng, mode);
    } else {
        h = gcn_layer(tape, norm_adj, x, params.get("enc.gcn1.weight"));
        h = leaky_relu(tape, h, 0.0); // plain ReLU
    }

    LatentState state;
    state.mu = gcn_layer(tape, norm_adj, h, params.get("enc.mu.weight"));
    if (cfg.variational) {
        state.logvar = gcn_layer(tape, norm_adj, h, params.get("enc.logvar.weight"));
        state.z = (mode == Mode::Train) ? reparameterize(tape, state.mu, state.logvar, rng)
                                        : state.mu;
    } else {
        state.z = state.mu;
    }
    return state;
}

TensorPtr decode(Tape& tape, const TensorPtr& z, std::size_t dense_budget) {
    if (static_cast<std::size_t>(z->rows) > dense_budget)
        throw ParamError("decode: " + std::to_string(z->rows) +
                         " nodes exceed the dense decoder budget of " +
                         std::to_string(dense_budget));
    return sigmoid(tape, matmul(tape, z, transpose(tape, z)));
}

TensorPtr discriminate(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                       const TensorPtr& samples, RngStream& rng, Mode mode) {
    if (samples->cols != static_cast<int>(cfg.d_latent))
        throw ParamError("discriminate: sample width != d_latent");
    auto h = linear(tape, samples, params.get("disc.fc1.weight"), params.get("disc.fc1.bias"));
    auto bn = bn_state(params, cfg, "disc.bn");
    h = batch_norm(tape, h, bn, mode, mode == Mode::Train);
    h = leaky_relu(tape, h, cfg.act_slope);
    h = dropout(tape, h, cfg.dropout_p, rng, mode);
    return linear(tape, h, params.get("disc.fc2.weight"), params.get("disc.fc2.bias"));
}

TensorPtr loss_reconstruction(Tape& tape, const TensorPtr& pred,
                              const SparseGraph& target_with_loops, ReconLoss kind) {
    std::size_t n = target_with_loops.n;
    if (pred->rows != static_cast<int>(n) || pred->cols != static_cast<int>(n))
        throw ParamError("loss_reconstruction: prediction must be n x n");
    double n2 = static_cast<double>(n) * static_cast<double>(n);
    double nnz = static_cast<double>(target_with_loops.nnz());
    if (nnz == 0.0) throw ParamError("loss_reconstruction: degenerate target graph (no edges)");

    // dense 0/1 target from the CSR pattern
    auto target = std::make_shared<std::vector<std::uint8_t>>(pred->size(), std::uint8_t{0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint64_t e = target_with_loops.row_offsets[i];
             e < target_with_loops.row_offsets[i + 1]; ++e)
            (*target)[i * n + target_with_loops.cols[e]] = 1;

    auto out = make_tensor(1, 1);
    constexpr double kClamp = 1e-12;

    if (kind == ReconLoss::Mse) {
        double inv = 1.0 / n2;
        double s = 0.0;
        for (std::size_t i = 0; i < pred->size(); ++i) {
            double diff = pred->data[i] - static_cast<double>((*target)[i]);
            s += diff * diff;
        }
        out->data[0] = s * inv;
        check_finite(*out, "loss_reconstruction");
        out->requires_grad = pred->requires_grad;
        if (out->requires_grad) {
            tape.record([pred, target, out, inv]() {
                if (out->grad.empty()) return;
                pred->ensure_grad();
                double g = out->grad[0] * inv;
                for (std::size_t i = 0; i < pred->size(); ++i)
                    pred->grad[i] += g * 2.0 *
                                     (pred->data[i] - static_cast<double>((*target)[i]));
            });
        }
        return out;
    }

    if (nnz >= n2) throw ParamError("loss_reconstruction: target graph is complete");
    double pos_weight = (n2 - nnz) / nnz;
    double norm = n2 / (2.0 * (n2 - nnz));
    double factor = norm / n2;
    double s = 0.0;
    for (std::size_t i = 0; i < pred->size(); ++i) {
        double p = pred->data[i];
        if ((*target)[i])
            s += pos_weight * (-std::log(std::max(p, kClamp)));
        else
            s += -std::log(std::max(1.0 - p, kClamp));
    }
    out->data[0] = s * factor;
    check_finite(*out, "loss_reconstruction");
    out->requires_grad = pred->requires_grad;
    if (out->requires_grad) {
        tape.record([pred, target, out, factor, pos_weight]() {
            if (out->grad.empty()) return;
            pred->ensure_grad();
            double g = out->grad[0] * factor;
            for (std::size_t i = 0; i < pred->size(); ++i) {
                double p = pred->data[i];
                if ((*target)[i]) {
                    if (p > kClamp) pred->grad[i] += g * (-pos_weight / p);
                } else {
                    if (1.0 - p > kClamp) pred->grad[i] += g / (1.0 - p);
                }
            }
        });
    }
    return out;
}

TensorPtr loss_kl(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar) {
    if (mu->rows != logvar->rows || mu->cols != logvar->cols)
        throw ParamError("loss_kl: mu/logvar shape mismatch");
    auto inner = sub(tape, sub(tape, add_scalar(tape, logvar, 1.0), square(tape, mu)),
                     exp_elem(tape, logvar));
    return scale(tape, sum_all(tape, inner), -0.5 / static_cast<double>(mu->rows));
}

TensorPtr loss_adversarial(Tape& tape, const TensorPtr& real_logits,
                           const TensorPtr& fake_logits, AdvRole role) {
    if (role == AdvRole::Generator) return bce_logits_mean(tape, fake_logits, 1.0);
    return add(tape, bce_logits_mean(tape, real_logits, 1.0),
               bce_logits_mean(tape, fake_logits, 0.0));
}

TensorPtr features_tensor(const FeatureDataset& ds) {
    auto x = make_tensor(static_cast<int>(ds.n()), static_cast<int>(ds.d));
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        x->data[i] = static_cast<double>(ds.features[i]);
    return x;
}

namespace {

std::vector<NamedTensor> select_prefixes(ModelParams& params,
                                         const std::vector<std::string>& prefixes) {
    std::vector<NamedTensor> out;
    for (auto& nt : params.trainable)
        for (const auto& p : prefixes)
            if (nt.first.rfind(p, 0) == 0) {
                out.push_back(nt);
                break;
            }
    return out;
}

} // namespace

Checkpoint train(const FeatureDataset& ds, const SparseGraph& adj_sym,
                 const NormalizedAdjacency& norm_adj, const ModelConfig& cfg_in) {
    ModelConfig cfg = cfg_in;
    cfg.validate();
    ds.validate();
    if (cfg.d_in != ds.d)
        throw ParamError("train: config d_in " + std::to_string(cfg.d_in) +
                         " != dataset dimension " + std::to_string(ds.d));
    if (adj_sym.n != ds.n() || norm_adj.n != ds.n())
        throw ParamError("train: graph does not cover the dataset");
    if (!adj_sym.is_symmetric()) throw ParamError("train: graph must be symmetric");
    if (cfg.w_kl < 0.0) cfg.w_kl = 1.0 / static_cast<double>(ds.n());

    RngStream init_rng = RngStream::derive(cfg.seed, 0x494e4954ULL);
    RngStream rng = RngStream::derive(cfg.seed, 0x545241494eULL);

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = init_params(cfg, init_rng);
    ModelParams& params = ckpt.params;

    SparseGraph target = with_self_loops(adj_sym);
    TensorPtr x = features_tensor(ds);

    auto enc_group = select_prefixes(params, {"gat.", "enc."});
    auto disc_group = select_prefixes(params, {"disc."});
    AdamState opt_enc, opt_disc;
    opt_enc.lr = cfg.lr;
    opt_disc.lr = cfg.lr;

    int n = static_cast<int>(ds.n());
    int dz = static_cast<int>(cfg.d_latent);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochLoss losses;

        if (cfg.adversarial) {
            params.set_requires_grad("gat.", false);
            params.set_requires_grad("enc.", false);
            params.set_requires_grad("disc.", true);
            for (std::size_t it = 0; it < cfg.disc_iters; ++it) {
                Tape tape;
                auto fake = encode(tape, params, cfg, x, adj_sym, norm_adj, rng, Mode::Train).z;
                auto real = make_tensor(n, dz);
                for (auto& v : real->data) v = rng.normal();
                auto real_logits = discriminate(tape, params, cfg, real, rng, Mode::Train);
                auto fake_logits = discriminate(tape, params, cfg, fake, rng, Mode::Train);
                auto l_disc =
                    loss_adversarial(tape, real_logits, fake_logits, AdvRole::Discriminator);
                if (!std::isfinite(l_disc->data[0]))
                    throw NumericError("train: non-finite discriminator loss at epoch " +
                                       std::to_string(epoch));
                params.zero_grads();
                tape.backward(l_disc);
                adam_step(disc_group, opt_disc);
                losses.disc = l_disc->data[0];
            }
        }

        params.set_requires_grad("gat.", true);
        params.set_requires_grad("enc.", true);
        params.set_requires_grad("disc.", false);

        Tape tape;
        LatentState latent = encode(tape, params, cfg, x, adj_sym, norm_adj, rng, Mode::Train);
        auto pred = decode(tape, latent.z, cfg.dense_budget);
        auto l_recon = loss_reconstruction(tape, pred, target, cfg.recon_loss);
        losses.recon = l_recon->data[0];
        TensorPtr total = scale(tape, l_recon, cfg.w_recon);
        if (cfg.variational) {
            auto l_kl = loss_kl(tape, latent.mu, latent.logvar);
            losses.kl = l_kl->data[0];
            total = add(tape, total, scale(tape, l_kl, cfg.w_kl));
        }
        if (cfg.adversarial) {
            // frozen discriminator in eval mode scores the current embeddings
            auto fake_logits = discriminate(tape, params, cfg, latent.z, rng, Mode::Eval);
            auto l_gen = loss_adversarial(tape, fake_logits, fake_logits, AdvRole::Generator);
            losses.gen = l_gen->data[0];
            total = add(tape, total, scale(tape, l_gen, cfg.w_adv));
        }
        losses.total = total->data[0];
        if (!std::isfinite(losses.total))
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));

        params.zero_grads();
        tape.backward(total);
        adam_step(enc_group, opt_enc);

        ckpt.history.push_back(losses);
        ckpt.epoch = epoch;
    }

    params.set_requires_grad("disc.", true);
    ckpt.rng_seed = rng.seed();
    ckpt.rng_counter = rng.counter();
    return ckpt;
}

// ---- checkpoint format (GRFM) ----

namespace {

void write_named_tensors(bin::Writer& w, const std::vector<NamedTensor>& tensors) {
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        w.str(name);
        w.u64(static_cast<std::uint64_t>(t->rows));
        w.u64(static_cast<std::uint64_t>(t->cols));
        for (double v : t->data) w.f64(v);
    }
}

std::vector<NamedTensor> read_named_tensors(bin::Reader& r, bool requires_grad) {
    std::uint32_t count = r.u32();
    std::vector<NamedTensor> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        std::uint64_t rows = r.u64();
        std::uint64_t cols = r.u64();
        if (rows == 0 || cols == 0 || rows > 1u << 24 || cols > 1u << 24)
            throw DataError("checkpoint: implausible shape for tensor '" + name + "'");
        auto t = make_tensor(static_cast<int>(rows), static_cast<int>(cols), 0.0, requires_grad);
        for (auto& v : t->data) v = r.f64();
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

void check_tensor_shape(const ModelParams& params, const std::string& name, int rows, int cols) {
    auto t = params.find(name);
    if (!t) throw DataError("checkpoint: missing tensor '" + name + "'");
    if (t->rows != rows || t->cols != cols)
        throw DataError("checkpoint: tensor '" + name + "' has shape " +
                        std::to_string(t->rows) + "x" + std::to_string(t->cols) +
                        ", config expects " + std::to_string(rows) + "x" + std::to_string(cols));
}

void validate_shapes(const Checkpoint& ckpt) {
    const ModelConfig& cfg = ckpt.config;
    int din = static_cast<int>(cfg.d_in);
    int dh = static_cast<int>(cfg.d_hidden);
    int width = static_cast<int>(cfg.heads * cfg.d_hidden);
    int dz = static_cast<int>(cfg.d_latent);
    int dd = static_cast<int>(cfg.disc_hidden);
    if (cfg.use_attention) {
        for (std::size_t h = 0; h < cfg.heads; ++h) {
            std::string base = "gat.h" + std::to_string(h);
            check_tensor_shape(ckpt.params, base + ".weight", din, dh);
            check_tensor_shape(ckpt.params, base + ".attn_src", dh, 1);
            check_tensor_shape(ckpt.params, base + ".attn_dst", dh, 1);
        }
        check_tensor_shape(ckpt.params, "enc.bn.gamma", 1, width);
        check_tensor_shape(ckpt.params, "enc.bn.running_var", 1, width);
    } else {
        check_tensor_shape(ckpt.params, "enc.gcn1.weight", din, width);
    }
    check_tensor_shape(ckpt.params, "enc.mu.weight", width, dz);
    check_tensor_shape(ckpt.params, "enc.logvar.weight", width, dz);
    check_tensor_shape(ckpt.params, "disc.fc1.weight", dz, dd);
    check_tensor_shape(ckpt.params, "disc.fc2.weight", dd, 1);
}

} // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    const ModelConfig& c = ckpt.config;
    bin::Writer w;
    w.bytes("GRFM", 4);
    w.u32(1);
    w.u64(c.d_in);
    w.u64(c.d_hidden);
    w.u64(c.heads);
    w.u64(c.d_latent);
    w.u64(c.disc_hidden);
    w.f64(c.dropout_p);
    w.u8(c.use_attention ? 1 : 0);
    w.u8(c.variational ? 1 : 0);
    w.u8(c.adversarial ? 1 : 0);
    w.f64(c.lr);
    w.u64(c.epochs);
    w.u64(c.disc_iters);
    w.u64(c.seed);
    w.f64(c.w_recon);
    w.f64(c.w_kl);
    w.f64(c.w_adv);
    w.u8(c.recon_loss == ReconLoss::Bce ? 0 : 1);
    w.f64(c.attn_slope);
    w.f64(c.act_slope);
    w.f64(c.bn_momentum);
    w.f64(c.bn_eps);
    w.u64(c.dense_budget);

    write_named_tensors(w, ckpt.params.trainable);
    write_named_tensors(w, ckpt.params.buffers);

    w.u64(ckpt.epoch);
    w.u32(static_cast<std::uint32_t>(ckpt.history.size()));
    for (const auto& h : ckpt.history) {
        w.f64(h.recon);
        w.f64(h.kl);
        w.f64(h.gen);
        w.f64(h.disc);
        w.f64(h.total);
    }
    w.u64(ckpt.rng_seed);
    w.u64(ckpt.rng_counter);
    return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    bin::Reader r(bytes);
    bin::expect_magic(r, "GRFM", "checkpoint");
    std::uint32_t version = r.u32();
    if (version != 1)
        throw DataError("unsupported checkpoint format version " + std::to_string(version));

    Checkpoint ckpt;
    ModelConfig& c = ckpt.config;
    c.d_in = r.u64();
    c.d_hidden = r.u64();
    c.heads = r.u64();
    c.d_latent = r.u64();
    c.disc_hidden = r.u64();
    c.dropout_p = r.f64();
    c.use_attention = r.u8() != 0;
    c.variational = r.u8() != 0;
    c.adversarial = r.u8() != 0;
    c.lr = r.f64();
    c.epochs = r.u64();
    c.disc_iters = r.u64();
    c.seed = r.u64();
    c.w_recon = r.f64();
    c.w_kl = r.f64();
    c.w_adv = r.f64();
    c.recon_loss = r.u8() == 0 ? ReconLoss::Bce : ReconLoss::Mse;
    c.attn_slope = r.f64();
    c.act_slope = r.f64();
    c.bn_momentum = r.f64();
    c.bn_eps = r.f64();
    c.dense_budget = r.u64();

    ckpt.params.trainable = read_named_tensors(r, true);
    ckpt.params.buffers = read_named_tensors(r, false);

    ckpt.epoch = r.u64();
    std::uint32_t hist = r.u32();
    ckpt.history.resize(hist);
    for (auto& h : ckpt.history) {
        h.recon = r.f64();
        h.kl = r.f64();
        h.gen = r.f64();
        h.disc = r.f64();
        h.total = r.f64();
    }
    ckpt.rng_seed = r.u64();
    ckpt.rng_counter = r.u64();
    validate_shapes(ckpt);
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    bin::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) {
    return parse_checkpoint(bin::read_file(path));
}

} // namespace grf
