#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "grf/binio.hpp"
#include "grf/dataset.hpp"
#include "grf/error.hpp"
#include "grf/graph.hpp"
#include "grf/index.hpp"
#include "grf/metrics.hpp"
#include "grf/model.hpp"

namespace fs = std::filesystem;

namespace {

// Removes declared output files unless release() is called, so failed
// commands do not leave partial artifacts behind.
class OutputGuard {
public:
    void track(const std::string& path) { paths_.push_back(path); }
    void release() { paths_.clear(); }
    ~OutputGuard() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<std::string> paths_;
};

void require_input(const std::string& path) {
    if (!fs::exists(path)) throw grf::ParamError("input file does not exist: " + path);
}

grf::SplitRatios parse_ratios(const std::string& text) {
    grf::SplitRatios r;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &r.train, &r.val, &r.test) != 3)
        throw grf::ParamError("split must be three comma-separated fractions, e.g. 0.7,0.1,0.2");
    r.validate();
    return r;
}

// Flat key=value config file; '#' starts a comment. CLI flags win.
std::map<std::string, std::string> load_flat_config(const std::string& path) {
    require_input(path);
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t");
        line = line.substr(first, last - first + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw grf::DataError(path + ":" + std::to_string(line_no) +
                                 ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t");
            s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        if (key.empty()) throw grf::DataError(path + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

// Expand the flat config into synthetic "--flag=value" tokens inserted ahead
// of the user's own flags; TakeLast policy makes explicit flags win. Config
// keys use underscores: epochs=250, k_graph=15, d_latent=32, ...
std::vector<std::string> expand_config_args(CLI::App& app, const std::vector<std::string>& args,
                                            const std::map<std::string, std::string>& kv) {
    std::size_t sub_pos = args.size();
    CLI::App* sub = nullptr;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (auto* s = app.get_subcommand_no_throw(args[i])) {
            sub_pos = i;
            sub = s;
            break;
        }
    }
    std::vector<std::string> out;
    out.push_back(args[0]);
    std::vector<std::string> global_extra, sub_extra;
    for (const auto& [key, value] : kv) {
        std::string flag = "--" + key;
        for (auto& c : flag)
            if (c == '_') c = '-';
        if (sub && sub->get_option_no_throw(flag))
            sub_extra.push_back(flag + "=" + value);
        else if (app.get_option_no_throw(flag))
            global_extra.push_back(flag + "=" + value);
        // keys for other subcommands are ignored
    }
    for (auto& a : global_extra) out.push_back(a);
    for (std::size_t i = 1; i < args.size(); ++i) {
        out.push_back(args[i]);
        if (i == sub_pos)
            for (auto& a : sub_extra) out.push_back(a);
    }
    return out;
}

void allow_overrides(CLI::App* app) {
    for (CLI::Option* o : app->get_options())
        if (o->get_expected_min() > 0) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    for (CLI::App* sub : app->get_subcommands(nullptr)) allow_overrides(sub);
}

void print_dataset_summary(const grf::FeatureDataset& ds) {
    std::printf("dataset: n=%zu d=%zu classes=%zu train=%zu val=%zu test=%zu unassigned=%zu\n",
                ds.n(), ds.d, ds.num_classes(), ds.split_count(grf::Split::Train),
                ds.split_count(grf::Split::Val), ds.split_count(grf::Split::Test),
                ds.split_count(grf::Split::Unassigned));
}

void print_graph_summary(const grf::SparseGraph& g) {
    std::size_t min_deg = g.n ? g.nnz() : 0, max_deg = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        std::size_t deg = g.row_offsets[i + 1] - g.row_offsets[i];
        min_deg = std::min(min_deg, deg);
        max_deg = std::max(max_deg, deg);
    }
    double mean_deg = g.n ? static_cast<double>(g.nnz()) / g.n : 0.0;
    std::printf("graph: n=%zu edges=%zu degree(min=%zu mean=%.2f max=%zu)\n", g.n, g.nnz(),
                min_deg, mean_deg, max_deg);
}

void write_loss_csv(const grf::Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw grf::DataError("cannot open file for writing: " + path);
    out << "epoch,recon,kl,gen,disc,total\n";
    char buf[256];
    for (std::size_t i = 0; i < ckpt.history.size(); ++i) {
        const auto& h = ckpt.history[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1, h.recon,
                      h.kl, h.gen, h.disc, h.total);
        out << buf;
    }
    if (!out) throw grf::DataError("write failure: " + path);
}

std::vector<std::vector<float>> load_query_vectors(const std::string& path, std::size_t d) {
    require_input(path);
    std::ifstream in(path);
    std::vector<std::vector<float>> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        for (auto& c : line)
            if (c == ',' || c == '\t') c = ' ';
        std::istringstream ss(line);
        std::vector<float> q;
        float v;
        while (ss >> v) q.push_back(v);
        if (q.empty()) continue;
        if (q.size() != d)
            throw grf::DataError(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(d) + " values, got " + std::to_string(q.size()));
        queries.push_back(std::move(q));
    }
    if (queries.empty()) throw grf::DataError(path + ": no query vectors");
    return queries;
}

struct GlobalOpts {
    std::uint64_t seed = 42;
    int threads = 1;
    std::string config_path;
};

int run(int argc, char** argv) {
    CLI::App app{"graph-autoencoder retrieval engine"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads for graph construction")
        ->capture_default_str();
    app.add_option("--config", global.config_path, "flat key=value config file");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "CSV dataset to binary, optionally re-split");
    std::string in_csv, out_path, split_spec;
    ingest->add_option("--csv", in_csv, "input CSV (header id,label,split,f0..)")->required();
    ingest->add_option("--out", out_path, "output dataset file")->required();
    ingest->add_option("--split", split_spec, "train,val,test fractions; re-splits the data");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic clustered dataset");
    std::size_t sy_classes = 4, sy_per_class = 100, sy_dim = 64;
    double sy_sep = 10.0, sy_sigma = 1.0;
    std::string sy_split = "0.7,0.1,0.2";
    std::string sy_out;
    synth->add_option("--classes", sy_classes, "number of classes")->capture_default_str();
    synth->add_option("--per-class", sy_per_class, "items per class")->capture_default_str();
    synth->add_option("--dim", sy_dim, "feature dimension")->capture_default_str();
    synth->add_option("--sep", sy_sep, "distance between class centers")->capture_default_str();
    synth->add_option("--sigma", sy_sigma, "isotropic noise sigma")->capture_default_str();
    synth->add_option("--split", sy_split, "train,val,test fractions")->capture_default_str();
    synth->add_option("--out", sy_out, "output dataset file")->required();

    // build-graph
    auto* build = app.add_subcommand("build-graph", "k-NN graph construction + symmetrize");
    std::string bg_data, bg_out, bg_method = "exact", bg_preset, bg_tsv;
    std::size_t bg_k = 15;
    int bg_trees = 8, bg_checks = 2048;
    build->add_option("--data", bg_data, "input dataset file")->required();
    build->add_option("--out", bg_out, "output graph file")->required();
    build->add_option("--k", bg_k, "neighbors per node")->capture_default_str();
    build->add_option("--method", bg_method, "exact|kdtree")->capture_default_str();
    build->add_option("--preset", bg_preset, "breakhis (k=25) | bach (k=15)");
    build->add_option("--trees", bg_trees, "kd-tree forest size")->capture_default_str();
    build->add_option("--checks", bg_checks, "kd-tree leaf-visit budget")->capture_default_str();
    build->add_option("--tsv", bg_tsv, "also export a src/dst/weight edge list");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the graph autoencoder");
    std::string tr_data, tr_graph, tr_out, tr_variant = "a-arvgae", tr_recon = "bce";
    grf::ModelConfig tr_cfg;
    train_cmd->add_option("--data", tr_data, "input dataset file")->required();
    train_cmd->add_option("--graph", tr_graph, "input graph file")->required();
    train_cmd->add_option("--out", tr_out, "output checkpoint file")->required();
    train_cmd->add_option("--variant", tr_variant, "gae|vgae|arvga|a-arvgae")
        ->capture_default_str();
    train_cmd->add_option("--epochs", tr_cfg.epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--lr", tr_cfg.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--dropout", tr_cfg.dropout_p, "dropout probability")
        ->capture_default_str();
    train_cmd->add_option("--heads", tr_cfg.heads, "attention heads")->capture_default_str();
    train_cmd->add_option("--d-hidden", tr_cfg.d_hidden, "hidden width per head")
        ->capture_default_str();
    train_cmd->add_option("--d-latent", tr_cfg.d_latent, "latent dimension")
        ->capture_default_str();
    train_cmd->add_option("--disc-hidden", tr_cfg.disc_hidden, "discriminator hidden width")
        ->capture_default_str();
    train_cmd->add_option("--disc-iters", tr_cfg.disc_iters, "discriminator steps per epoch")
        ->capture_default_str();
    train_cmd->add_option("--w-recon", tr_cfg.w_recon, "reconstruction loss weight")
        ->capture_default_str();
    train_cmd->add_option("--w-kl", tr_cfg.w_kl, "KL loss weight (negative = 1/n)")
        ->capture_default_str();
    train_cmd->add_option("--w-adv", tr_cfg.w_adv, "generator loss weight")
        ->capture_default_str();
    train_cmd->add_option("--recon-loss", tr_recon, "bce|mse")->capture_default_str();

    // embed
    auto* embed = app.add_subcommand("embed", "build the retrieval index from a checkpoint");
    std::string em_ckpt, em_data, em_graph, em_out, em_subset = "train";
    embed->add_option("--ckpt", em_ckpt, "input checkpoint file")->required();
    embed->add_option("--data", em_data, "input dataset file")->required();
    embed->add_option("--graph", em_graph, "input graph file")->required();
    embed->add_option("--out", em_out, "output index file")->required();
    embed->add_option("--subset", em_subset, "train|train+val|all")->capture_default_str();

    // query
    auto* query_cmd = app.add_subcommand("query", "top-K retrieval for query vectors");
    std::string qu_index, qu_ckpt, qu_data, qu_graph, qu_vec, qu_out;
    std::size_t qu_k = 5, qu_k_graph = 15;
    query_cmd->add_option("--index", qu_index, "input index file")->required();
    query_cmd->add_option("--ckpt", qu_ckpt, "input checkpoint file")->required();
    query_cmd->add_option("--data", qu_data, "input dataset file")->required();
    query_cmd->add_option("--graph", qu_graph, "input graph file")->required();
    query_cmd->add_option("--vec", qu_vec, "query vectors, one per line")->required();
    query_cmd->add_option("--k", qu_k, "results per query")->capture_default_str();
    query_cmd->add_option("--k-graph", qu_k_graph, "neighbors used to attach the query")
        ->capture_default_str();
    query_cmd->add_option("--out", qu_out, "write results CSV here (default stdout)");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "mAP(k)/mMV(k) over the test split");
    std::string ev_index, ev_ckpt, ev_data, ev_graph, ev_out, ev_csv;
    std::size_t ev_k = 5, ev_k_graph = 15;
    eval_cmd->add_option("--index", ev_index, "input index file")->required();
    eval_cmd->add_option("--ckpt", ev_ckpt, "input checkpoint file")->required();
    eval_cmd->add_option("--data", ev_data, "input dataset file")->required();
    eval_cmd->add_option("--graph", ev_graph, "input graph file")->required();
    eval_cmd->add_option("--k", ev_k, "retrieval cutoff")->capture_default_str();
    eval_cmd->add_option("--k-graph", ev_k_graph, "neighbors used to attach queries")
        ->capture_default_str();
    eval_cmd->add_option("--out", ev_out, "report JSON path")->required();
    eval_cmd->add_option("--csv-out", ev_csv, "also write <prefix>.csv and <prefix>_queries.csv");

    allow_overrides(&app);

    std::vector<std::string> args(argv, argv + argc);
    // peek at --config before the real parse so its values become defaults
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string cfg;
        if (args[i] == "--config" && i + 1 < args.size())
            cfg = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            cfg = args[i].substr(9);
        if (!cfg.empty()) {
            args = expand_config_args(app, args, load_flat_config(cfg));
            break;
        }
    }
    std::vector<const char*> argv2;
    argv2.reserve(args.size());
    for (const auto& a : args) argv2.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv2.size()), argv2.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.got_subcommand(ingest)) {
        require_input(in_csv);
        OutputGuard guard;
        guard.track(out_path);
        grf::FeatureDataset ds = grf::load_csv(in_csv);
        if (!split_spec.empty()) ds = grf::assign_splits(ds, parse_ratios(split_spec), global.seed);
        grf::save_binary(ds, out_path);
        print_dataset_summary(ds);
        guard.release();
    } else if (app.got_subcommand(synth)) {
        OutputGuard guard;
        guard.track(sy_out);
        grf::FeatureDataset ds =
            grf::synth_clusters(sy_per_class, sy_classes, sy_dim, sy_sep, sy_sigma, global.seed);
        ds = grf::assign_splits(ds, parse_ratios(sy_split), global.seed);
        grf::save_binary(ds, sy_out);
        print_dataset_summary(ds);
        guard.release();
    } else if (app.got_subcommand(build)) {
        require_input(bg_data);
        if (!bg_preset.empty()) {
            if (bg_preset == "breakhis")
                bg_k = 25;
            else if (bg_preset == "bach")
                bg_k = 15;
            else
                throw grf::ParamError("unknown preset: '" + bg_preset +
                                      "' (expected breakhis|bach)");
        }
        OutputGuard guard;
        guard.track(bg_out);
        grf::FeatureDataset ds = grf::load_binary(bg_data);
        grf::KnnOptions opts;
        opts.method = grf::knn_method_from_name(bg_method);
        opts.trees = bg_trees;
        opts.checks = bg_checks;
        opts.threads = global.threads;
        grf::SparseGraph knn = grf::knn_graph(ds, bg_k, opts, global.seed);
        grf::SparseGraph sym = grf::symmetrize(knn);
        grf::save_graph(sym, bg_out);
        if (!bg_tsv.empty()) {
            guard.track(bg_tsv);
            grf::export_tsv(sym, bg_tsv);
        }
        print_graph_summary(sym);
        guard.release();
    } else if (app.got_subcommand(train_cmd)) {
        require_input(tr_data);
        require_input(tr_graph);
        OutputGuard guard;
        guard.track(tr_out);
        guard.track(tr_out + ".losses.csv");
        grf::FeatureDataset ds = grf::load_binary(tr_data);
        grf::SparseGraph adj = grf::load_graph(tr_graph);
        grf::NormalizedAdjacency norm = grf::normalize(adj);
        tr_cfg.apply_variant(grf::variant_from_name(tr_variant));
        tr_cfg.recon_loss = tr_recon == "mse" ? grf::ReconLoss::Mse : grf::ReconLoss::Bce;
        if (tr_recon != "bce" && tr_recon != "mse")
            throw grf::ParamError("unknown recon loss: '" + tr_recon + "' (expected bce|mse)");
        tr_cfg.d_in = ds.d;
        tr_cfg.seed = global.seed;
        grf::Checkpoint ckpt = grf::train(ds, adj, norm, tr_cfg);
        grf::save_checkpoint(ckpt, tr_out);
        write_loss_csv(ckpt, tr_out + ".losses.csv");
        if (!ckpt.history.empty())
            std::printf("trained %s for %zu epochs: total loss %.6f -> %.6f\n",
                        grf::variant_name(tr_cfg.variant()), tr_cfg.epochs,
                        ckpt.history.front().total, ckpt.history.back().total);
        else
            std::printf("trained %s for 0 epochs (initialization only)\n",
                        grf::variant_name(tr_cfg.variant()));
        guard.release();
    } else if (app.got_subcommand(embed)) {
        require_input(em_ckpt);
        require_input(em_data);
        require_input(em_graph);
        OutputGuard guard;
        guard.track(em_out);
        grf::Checkpoint ckpt = grf::load_checkpoint(em_ckpt);
        grf::FeatureDataset ds = grf::load_binary(em_data);
        grf::SparseGraph adj = grf::load_graph(em_graph);
        grf::NormalizedAdjacency norm = grf::normalize(adj);
        grf::RetrievalIndex index =
            grf::build_index(ckpt, ds, adj, norm, grf::subset_from_name(em_subset));
        grf::save_index(index, em_out);
        std::printf("index: %zu entries, d_latent=%zu, subset=%s\n", index.n(), index.d_latent,
                    em_subset.c_str());
        guard.release();
    } else if (app.got_subcommand(query_cmd)) {
        require_input(qu_index);
        require_input(qu_ckpt);
        require_input(qu_data);
        require_input(qu_graph);
        grf::RetrievalIndex index = grf::load_index(qu_index);
        grf::Checkpoint ckpt = grf::load_checkpoint(qu_ckpt);
        grf::FeatureDataset ds = grf::load_binary(qu_data);
        grf::SparseGraph adj = grf::load_graph(qu_graph);
        auto queries = load_query_vectors(qu_vec, ds.d);
        auto batch = grf::query_batch(index, ckpt, ds, adj, queries, qu_k, qu_k_graph);
        std::vector<std::pair<std::string, std::vector<grf::QueryHit>>> results;
        bool any_failed = false;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::string qid = "q" + std::to_string(i);
            if (!batch[i].ok) {
                std::fprintf(stderr, "%s failed: %s\n", qid.c_str(), batch[i].error.c_str());
                any_failed = true;
                continue;
            }
            results.emplace_back(qid, batch[i].hits);
        }
        if (!qu_out.empty()) {
            OutputGuard guard;
            guard.track(qu_out);
            grf::export_hits_csv(results, qu_out);
            guard.release();
        } else {
            std::printf("query_id,rank,id,label,distance\n");
            for (const auto& [qid, hits] : results)
                for (std::size_t r = 0; r < hits.size(); ++r)
                    std::printf("%s,%zu,%s,%u,%.17g\n", qid.c_str(), r + 1, hits[r].id.c_str(),
                                hits[r].label, hits[r].distance);
        }
        if (any_failed) return 4;
    } else if (app.got_subcommand(eval_cmd)) {
        require_input(ev_index);
        require_input(ev_ckpt);
        require_input(ev_data);
        require_input(ev_graph);
        OutputGuard guard;
        guard.track(ev_out);
        grf::RetrievalIndex index = grf::load_index(ev_index);
        grf::Checkpoint ckpt = grf::load_checkpoint(ev_ckpt);
        grf::FeatureDataset ds = grf::load_binary(ev_data);
        grf::SparseGraph adj = grf::load_graph(ev_graph);
        grf::EvalReport report = grf::evaluate(index, ckpt, ds, adj, ev_k, ev_k_graph);
        grf::save_report_json(report, ev_out);
        if (!ev_csv.empty()) {
            guard.track(ev_csv + ".csv");
            guard.track(ev_csv + "_queries.csv");
            grf::save_report_csv(report, ev_csv + ".csv", ev_csv + "_queries.csv");
        }
        std::printf("map(%zu)=%.4f mmv(%zu)=%.4f evaluated=%zu skipped=%zu\n", report.k,
                    report.map_k, report.k, report.mmv_k, report.evaluated, report.skipped);
        guard.release();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const grf::ParamError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const grf::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const grf::NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
