#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "strokegen/error.hpp"
#include "strokegen/grad_check.hpp"
#include "strokegen/layers.hpp"

using namespace strokegen;

namespace {

constexpr const char* kGruNames[9] = {"Wz", "Wr", "Wh", "Uz", "Ur", "Uh",
                                      "bz", "br", "bh"};

void create_gru_params(ParamStore& store, std::size_t in, std::size_t hidden,
                       SeededRng& rng, double scale) {
    for (const char* n : {"Wz", "Wr", "Wh"})
        store.create(n, oracles::random_tensor({in, hidden}, rng, -scale, scale));
    for (const char* n : {"Uz", "Ur", "Uh"})
        store.create(n, oracles::random_tensor({hidden, hidden}, rng, -scale, scale));
    for (const char* n : {"bz", "br", "bh"})
        store.create(n, oracles::random_tensor({hidden}, rng, -scale, scale));
}

GruCellWeights weights_view(const ParamStore& store) {
    return {&store.value("Wz"), &store.value("Wr"), &store.value("Wh"),
            &store.value("Uz"), &store.value("Ur"), &store.value("Uh"),
            &store.value("bz"), &store.value("br"), &store.value("bh")};
}

}  // namespace

TEST_CASE("gru cell: all-zero weights halve the previous state") {
    ParamStore store;
    SeededRng rng(1);
    for (const char* n : {"Wz", "Wr", "Wh"}) store.create(n, Tensor::zeros({3, 4}));
    for (const char* n : {"Uz", "Ur", "Uh"}) store.create(n, Tensor::zeros({4, 4}));
    for (const char* n : {"bz", "br", "bh"}) store.create(n, Tensor::zeros({4}));
    Tensor x = oracles::random_tensor({2, 3}, rng);
    Tensor h_prev = oracles::random_tensor({2, 4}, rng);
    Tensor h = gru_cell_forward(x, h_prev, weights_view(store));
    // z = sigmoid(0) = 0.5, hcand = tanh(0) = 0, so h = 0.5 * h_prev
    for (std::size_t i = 0; i < h.size(); ++i)
        CHECK(h.data[i] == doctest::Approx(0.5 * h_prev.data[i]).epsilon(1e-12));
}

TEST_CASE("gru cell: zero state, zero input, zero biases give zero state") {
    ParamStore store;
    SeededRng rng(2);
    create_gru_params(store, 3, 4, rng, 0.7);
    store.value("bz").zero();
    store.value("br").zero();
    store.value("bh").zero();
    Tensor h = gru_cell_forward(Tensor::zeros({2, 3}), Tensor::zeros({2, 4}),
                                weights_view(store));
    for (double v : h.data) CHECK(v == 0.0);
}

TEST_CASE("gru cell: gate values stay in (0,1)") {
    SeededRng rng(3);
    ParamStore store;
    create_gru_params(store, 5, 6, rng, 2.0);
    GruCellCache cache;
    gru_cell_forward(oracles::random_tensor({4, 5}, rng, -3.0, 3.0),
                     oracles::random_tensor({4, 6}, rng, -3.0, 3.0),
                     weights_view(store), &cache);
    for (double v : cache.z.data) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
    for (double v : cache.r.data) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("gru cell rejects mismatched batch dimensions") {
    SeededRng rng(4);
    ParamStore store;
    create_gru_params(store, 3, 4, rng, 0.5);
    CHECK_THROWS_AS(gru_cell_forward(Tensor::zeros({2, 3}), Tensor::zeros({3, 4}),
                                     weights_view(store)),
                    Error);
}

TEST_CASE("gru cell backward matches finite differences on 20 random instances") {
    SeededRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = 2 + rng.uniform_int(4);
        const std::size_t hidden = 2 + rng.uniform_int(5);
        const std::size_t batch = 1 + rng.uniform_int(3);
        ParamStore store;
        create_gru_params(store, in, hidden, rng, 0.8);
        store.create("x", oracles::random_tensor({batch, in}, rng));
        store.create("h_prev", oracles::random_tensor({batch, hidden}, rng));
        const Tensor probe = oracles::random_tensor({batch, hidden}, rng);

        auto loss = [&] {
            Tensor h = gru_cell_forward(store.value("x"), store.value("h_prev"),
                                        weights_view(store));
            double acc = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) acc += h.data[i] * probe.data[i];
            return acc;
        };
        auto grads = [&] {
            store.zero_grads();
            GruCellCache cache;
            gru_cell_forward(store.value("x"), store.value("h_prev"),
                             weights_view(store), &cache);
            GruCellGrads g = gru_cell_backward(probe, weights_view(store), cache);
            const Tensor* parts[9] = {&g.dWz, &g.dWr, &g.dWh, &g.dUz, &g.dUr,
                                      &g.dUh, &g.dbz, &g.dbr, &g.dbh};
            for (int i = 0; i < 9; ++i) store.accumulate_grad(kGruNames[i], *parts[i]);
            store.accumulate_grad("x", g.dx);
            store.accumulate_grad("h_prev", g.dh_prev);
        };
        auto report = grad_check(store, loss, grads, 1e-5, 1e-5);
        CHECK_MESSAGE(report.pass, "trial ", trial, " worst ", report.worst_param,
                      " err ", report.max_rel_error);
    }
}
