#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grf/adam.hpp"
#include "grf/dataset.hpp"
#include "grf/graph.hpp"
#include "grf/layers.hpp"
#include "grf/tensor.hpp"

namespace grf {

enum class ReconLoss { Bce, Mse };

// Ablation ladder. The flag triples are:
//   gae      (attention=F, variational=F, adversarial=F)
//   vgae     (F, T, F)
//   arvga    (F, T, T)
//   a-arvgae (T, T, T)
enum class Variant { Gae, Vgae, Arvga, AArvgae };

Variant variant_from_name(const std::string& name);
const char* variant_name(Variant v);

struct ModelConfig {
    std::size_t d_in = 0;
    std::size_t d_hidden = 64; // per attention head
    std::size_t heads = 2;
    std::size_t d_latent = 32;
    std::size_t disc_hidden = 64;
    double dropout_p = 0.2;
    bool use_attention = true;
    bool variational = true;
    bool adversarial = true;
    double lr = 1e-4;
    std::size_t epochs = 250;
    std::size_t disc_iters = 5;
    std::uint64_t seed = 0;
    double w_recon = 1.0;
    double w_kl = -1.0; // < 0 means auto: 1/n at training time
    double w_adv = 1.0;
    ReconLoss recon_loss = ReconLoss::Bce;
    double attn_slope = 0.2; // LeakyReLU slope inside attention scores
    double act_slope = 0.01; // LeakyReLU slope elsewhere
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;
    std::size_t dense_budget = 20000; // max n for the dense decoder

    void apply_variant(Variant v);
    Variant variant() const;
    void validate() const;
};

// Ordered name -> tensor registry. `trainable` take optimizer steps;
// `buffers` (batch-norm running stats) are carried but not optimized.
struct ModelParams {
    std::vector<NamedTensor> trainable;
    std::vector<NamedTensor> buffers;

    TensorPtr get(const std::string& name) const;
    TensorPtr find(const std::string& name) const; // nullptr when absent
    void set_requires_grad(const std::string& prefix, bool value);
    void zero_grads();
};

ModelParams init_params(const ModelConfig& cfg, RngStream& rng);

struct LatentState {
    TensorPtr mu;
    TensorPtr logvar; // null when non-variational
    TensorPtr z;
};

struct EpochLoss {
    double recon = 0;
    double kl = 0;
    double gen = 0;
    double disc = 0;
    double total = 0;
};

struct Checkpoint {
    ModelConfig config;
    ModelParams params;
    std::uint64_t epoch = 0;
    std::vector<EpochLoss> history;
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_counter = 0;
};

// Encoder: [GAT -> batch_norm -> leaky_relu -> dropout] (attention variants)
// or [GCN -> ReLU] (baseline variants), then GCN heads for mu / log-variance.
// Train mode samples z = mu + exp(logvar/2) * eps; eval mode sets z = mu.
LatentState encode(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                   const TensorPtr& x, const SparseGraph& adj,
                   const NormalizedAdjacency& norm_adj, RngStream& rng, Mode mode);

TensorPtr reparameterize(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar,
                         RngStream& rng);

// A_hat = sigmoid(Z Z'), dense n x n
TensorPtr decode(Tape& tape, const TensorPtr& z, std::size_t dense_budget);

// MLP discriminator: linear -> batch_norm -> leaky_relu -> dropout -> linear.
// Returns per-row logits.
TensorPtr discriminate(Tape& tape, ModelParams& params, const ModelConfig& cfg,
                       const TensorPtr& samples, RngStream& rng, Mode mode);

// Pos-weighted BCE over all n^2 adjacency entries (VGAE convention), with
// pos_weight = (n^2 - nnz)/nnz and norm = n^2 / (2 (n^2 - nnz)). The target
// must be symmetric with self-loops. Probabilities are clamped at 1e-12.
// ReconLoss::Mse selects a plain mean-squared-error alternative.
TensorPtr loss_reconstruction(Tape& tape, const TensorPtr& pred,
                              const SparseGraph& target_with_loops, ReconLoss kind);

// (1/n) * sum_nodes -1/2 * sum_dims (1 + logvar - mu^2 - exp(logvar))
TensorPtr loss_kl(Tape& tape, const TensorPtr& mu, const TensorPtr& logvar);

enum class AdvRole { Discriminator, Generator };

// Discriminator: BCE(real -> 1) + BCE(fake -> 0).
// Generator: BCE(fake -> 1); `real` is ignored.
TensorPtr loss_adversarial(Tape& tape, const TensorPtr& real_logits,
                           const TensorPtr& fake_logits, AdvRole role);

TensorPtr features_tensor(const FeatureDataset& ds);

// Full training loop over the transductive graph; deterministic per seed.
Checkpoint train(const FeatureDataset& ds, const SparseGraph& adj_sym,
                 const NormalizedAdjacency& norm_adj, const ModelConfig& cfg);

// Checkpoint binary format, magic "GRFM".
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);

} // namespace grf
