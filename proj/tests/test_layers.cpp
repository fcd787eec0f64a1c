#include "doctest.h"

#include <cmath>

#include "grf/adam.hpp"
#include "grf/error.hpp"
#include "grf/graph.hpp"
#include "grf/layers.hpp"

#include "support/testutil.hpp"

using namespace grf;

namespace {

BatchNormState fresh_bn(int width) {
    BatchNormState bn;
    bn.gamma = make_tensor(1, width, 1.0, true);
    bn.beta = make_tensor(1, width, 0.0, true);
    bn.running_mean = make_tensor(1, width, 0.0);
    bn.running_var = make_tensor(1, width, 1.0);
    return bn;
}

} // namespace

TEST_SUITE("layers") {

TEST_CASE("batch_norm train mode yields zero mean unit variance columns") {
    RngStream rng(1);
    auto x = testutil::random_tensor(50, 4, rng, false, -3.0, 5.0);
    auto bn = fresh_bn(4);
    bn.eps = 1e-12;
    Tape tape;
    auto y = batch_norm(tape, x, bn, Mode::Train, false);
    for (int j = 0; j < 4; ++j) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 50; ++i) mean += y->at(i, j);
        mean /= 50;
        for (int i = 0; i < 50; ++i) var += (y->at(i, j) - mean) * (y->at(i, j) - mean);
        var /= 50;
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
}

TEST_CASE("batch_norm eval mode with unit running stats is gamma/beta affine") {
    RngStream rng(2);
    auto x = testutil::random_tensor(5, 3, rng, false);
    auto bn = fresh_bn(3);
    bn.eps = 0.0;
    Tape tape;
    auto y = batch_norm(tape, x, bn, Mode::Eval, false);
    for (std::size_t i = 0; i < x->size(); ++i) CHECK(y->data[i] == doctest::Approx(x->data[i]));
}

TEST_CASE("batch_norm updates running stats only when asked") {
    RngStream rng(3);
    auto x = testutil::random_tensor(20, 2, rng, false, 1.0, 3.0);
    auto bn = fresh_bn(2);
    Tape tape;
    batch_norm(tape, x, bn, Mode::Train, false);
    CHECK(bn.running_mean->data[0] == 0.0);
    batch_norm(tape, x, bn, Mode::Train, true);
    CHECK(bn.running_mean->data[0] != 0.0);
}

TEST_CASE("batch_norm gradients for x, gamma, beta") {
    RngStream rng(4);
    auto x = testutil::random_tensor(7, 3, rng);
    auto bn = fresh_bn(3);
    for (auto& v : bn.gamma->data) v = 0.5 + rng.uniform();
    for (auto& v : bn.beta->data) v = rng.uniform() - 0.5;
    auto weights = testutil::random_tensor(7, 3, rng, false);

    auto fwd = [&](Tape& t) {
        return sum_all(t, mul(t, batch_norm(t, x, bn, Mode::Train, false), weights));
    };
    auto value = [&]() {
        Tape t;
        return fwd(t)->data[0];
    };
    for (auto target : {x, bn.gamma, bn.beta}) {
        Tape tape;
        auto loss = fwd(tape);
        tape.backward(loss);
        CHECK(testutil::fd_max_rel_err(value, target, target->grad) < 1e-5);
    }
}

TEST_CASE("batch_norm tolerates a single row in train mode") {
    auto x = make_tensor(1, 3, 2.5);
    auto bn = fresh_bn(3);
    Tape tape;
    auto y = batch_norm(tape, x, bn, Mode::Train, true);
    for (double v : y->data) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("dropout identities and drop-rate statistics") {
    RngStream rng(5);
    auto x = testutil::random_tensor(10, 10, rng, false);
    Tape tape;
    CHECK(dropout(tape, x, 0.0, rng, Mode::Train) == x);
    CHECK(dropout(tape, x, 0.7, rng, Mode::Eval) == x);
    CHECK_THROWS_AS(dropout(tape, x, 1.0, rng, Mode::Train), ParamError);
    CHECK_THROWS_AS(dropout(tape, x, -0.1, rng, Mode::Train), ParamError);

    auto big = make_tensor(1000, 1000, 1.0);
    auto dropped = dropout(tape, big, 0.2, rng, Mode::Train);
    std::size_t zeros = 0;
    for (double v : dropped->data) {
        if (v == 0.0)
            ++zeros;
        else
            CHECK(v == doctest::Approx(1.0 / 0.8));
    }
    double rate = static_cast<double>(zeros) / static_cast<double>(dropped->size());
    CHECK(std::abs(rate - 0.2) < 0.002);
}

TEST_CASE("dropout gradient with a replayed mask") {
    RngStream init_rng(6);
    auto x = testutil::random_tensor(4, 4, init_rng);
    auto fwd = [&](Tape& t) {
        RngStream rng(99); // fixed seed fixes the mask
        return sum_all(t, square(t, dropout(t, x, 0.3, rng, Mode::Train)));
    };
    auto value = [&]() {
        Tape t;
        return fwd(t)->data[0];
    };
    Tape tape;
    auto loss = fwd(tape);
    tape.backward(loss);
    CHECK(testutil::fd_max_rel_err(value, x, x->grad) < 1e-6);
}

TEST_CASE("gat_layer on a single self-loop node is W'h") {
    SparseGraph g;
    g.n = 1;
    g.row_offsets = {0, 0}; // no edges; the layer adds the self-loop
    RngStream rng(7);
    auto x = testutil::random_tensor(1, 3, rng, false);
    std::vector<GatHead> heads(1);
    heads[0].weight = testutil::random_tensor(3, 4, rng);
    heads[0].attn_src = testutil::random_tensor(4, 1, rng);
    heads[0].attn_dst = testutil::random_tensor(4, 1, rng);
    Tape tape;
    auto out = gat_layer(tape, x, g, heads, 0.2);
    auto expected = matmul(tape, x, heads[0].weight);
    for (std::size_t i = 0; i < out->size(); ++i)
        CHECK(out->data[i] == doctest::Approx(expected->data[i]));
}

TEST_CASE("gat attention coefficients are a distribution over neighborhoods") {
    FeatureDataset ds = testutil::random_dataset(8, 5, 8);
    SparseGraph sym = symmetrize(knn_graph(ds, 3, KnnOptions{}, 1));
    RngStream rng(9);
    auto x = testutil::random_tensor(8, 5, rng, false);
    std::vector<GatHead> heads(2);
    for (auto& h : heads) {
        h.weight = testutil::random_tensor(5, 4, rng);
        h.attn_src = testutil::random_tensor(4, 1, rng);
        h.attn_dst = testutil::random_tensor(4, 1, rng);
    }
    Tape tape;
    std::vector<TensorPtr> attn;
    auto out = gat_layer(tape, x, sym, heads, 0.2, &attn);
    CHECK(out->cols == 8); // heads concatenated
    REQUIRE(attn.size() == 2);
    for (const auto& alpha : attn) {
        for (int i = 0; i < alpha->rows; ++i) {
            double row_sum = 0.0;
            for (int j = 0; j < alpha->cols; ++j) {
                CHECK(alpha->at(i, j) >= 0.0);
                row_sum += alpha->at(i, j);
            }
            CHECK(std::abs(row_sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("gat_layer full gradient check on a 6-node graph") {
    FeatureDataset ds = testutil::random_dataset(6, 4, 10);
    SparseGraph sym = symmetrize(knn_graph(ds, 2, KnnOptions{}, 1));
    RngStream rng(11);
    auto x = testutil::random_tensor(6, 4, rng);
    std::vector<GatHead> heads(2);
    for (auto& h : heads) {
        h.weight = testutil::random_tensor(4, 3, rng);
        h.attn_src = testutil::random_tensor(3, 1, rng);
        h.attn_dst = testutil::random_tensor(3, 1, rng);
    }
    auto weights = testutil::random_tensor(6, 6, rng, false);
    auto fwd = [&](Tape& t) {
        return sum_all(t, mul(t, gat_layer(t, x, sym, heads, 0.2), weights));
    };
    auto value = [&]() {
        Tape t;
        return fwd(t)->data[0];
    };
    std::vector<TensorPtr> all = {x};
    for (auto& h : heads) {
        all.push_back(h.weight);
        all.push_back(h.attn_src);
        all.push_back(h.attn_dst);
    }
    for (auto& p : all) {
        Tape tape;
        auto loss = fwd(tape);
        tape.backward(loss);
        CHECK(testutil::fd_max_rel_err(value, p, p->grad) < 1e-4);
    }
}

TEST_CASE("gcn_layer over self-loop-only adjacency reduces to a linear map") {
    SparseGraph g;
    g.n = 3;
    g.row_offsets = {0, 0, 0, 0};
    NormalizedAdjacency norm = normalize(g); // identity
    RngStream rng(12);
    auto x = testutil::random_tensor(3, 4, rng, false);
    auto w = testutil::random_tensor(4, 2, rng, false);
    Tape tape;
    auto out = gcn_layer(tape, norm, x, w);
    auto direct = matmul(tape, x, w);
    for (std::size_t i = 0; i < out->size(); ++i)
        CHECK(out->data[i] == doctest::Approx(direct->data[i]));
}

TEST_CASE("gcn_layer on the two-node single-edge graph averages rows") {
    SparseGraph g;
    g.n = 2;
    g.row_offsets = {0, 1, 2};
    g.cols = {1, 0};
    g.values = {1.0f, 1.0f};
    NormalizedAdjacency norm = normalize(g); // all entries 0.5
    auto x = make_tensor(2, 2, {1.0, 2.0, 3.0, 4.0});
    auto eye = make_tensor(2, 2, {1.0, 0.0, 0.0, 1.0});
    Tape tape;
    auto out = gcn_layer(tape, norm, x, eye);
    CHECK(out->at(0, 0) == doctest::Approx(0.5 * (1.0 + 3.0)));
    CHECK(out->at(0, 1) == doctest::Approx(0.5 * (2.0 + 4.0)));
    CHECK(out->at(1, 0) == doctest::Approx(0.5 * (1.0 + 3.0)));
}

TEST_CASE("gcn_layer gradient check") {
    FeatureDataset ds = testutil::random_dataset(10, 4, 13);
    NormalizedAdjacency norm = normalize(symmetrize(knn_graph(ds, 3, KnnOptions{}, 1)));
    RngStream rng(14);
    auto x = testutil::random_tensor(10, 4, rng);
    auto w = testutil::random_tensor(4, 3, rng);
    auto fwd = [&](Tape& t) { return sum_all(t, square(t, gcn_layer(t, norm, x, w))); };
    auto value = [&]() {
        Tape t;
        return fwd(t)->data[0];
    };
    for (auto& p : {x, w}) {
        Tape tape;
        auto loss = fwd(tape);
        tape.backward(loss);
        CHECK(testutil::fd_max_rel_err(value, p, p->grad) < 1e-5);
    }
}

TEST_CASE("adam leaves parameters unchanged at zero gradient") {
    auto w = make_tensor(2, 2, 0.7, true);
    w->zero_grad();
    std::vector<NamedTensor> group = {{"w", w}};
    AdamState state;
    state.lr = 0.1;
    adam_step(group, state);
    for (double v : w->data) CHECK(v == 0.7);
    CHECK(state.t == 1);
}

TEST_CASE("adam first step matches the closed form") {
    auto w = make_tensor(1, 1, 0.0, true);
    w->ensure_grad();
    w->grad[0] = 1.0;
    std::vector<NamedTensor> group = {{"w", w}};
    AdamState state;
    state.lr = 0.001;
    adam_step(group, state);
    // m_hat = 1, v_hat = 1 at t=1, so the update is -lr / (1 + eps)
    double expected = -0.001 / (1.0 + 1e-8);
    CHECK(w->data[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adam drives a quadratic bowl to zero") {
    auto w = make_tensor(1, 1, 5.0, true);
    std::vector<NamedTensor> group = {{"w", w}};
    AdamState state;
    state.lr = 1e-2;
    int steps = 0;
    for (; steps < 5000; ++steps) {
        if (std::abs(w->data[0]) < 1e-3) break;
        w->ensure_grad();
        w->grad[0] = 2.0 * w->data[0];
        adam_step(group, state);
    }
    CHECK(std::abs(w->data[0]) < 1e-3);
    CHECK(steps < 5000);
}

TEST_CASE("adam aborts on NaN gradients naming the parameter") {
    auto w = make_tensor(1, 1, 0.0, true);
    w->ensure_grad();
    w->grad[0] = std::nan("");
    std::vector<NamedTensor> group = {{"enc.mu.weight", w}};
    AdamState state;
    CHECK_THROWS_WITH_AS(adam_step(group, state), doctest::Contains("enc.mu.weight"),
                         NumericError);
}

} // TEST_SUITE
