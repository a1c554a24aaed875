#include "strokegen/generator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "strokegen/error.hpp"
#include "strokegen/layers.hpp"
#include "strokegen/serialize.hpp"

namespace strokegen {

using nlohmann::json;

const char* bias_kind_name(BiasKind kind) {
    switch (kind) {
        case BiasKind::letter: return "letter";
        case BiasKind::letter_writer: return "letter_writer";
        case BiasKind::classifier_embedding: return "classifier_embedding";
        case BiasKind::autoencoder_latent: return "autoencoder_latent";
        case BiasKind::external: return "external";
    }
    return "external";
}

BiasKind bias_kind_from_name(const std::string& name) {
    for (BiasKind k : {BiasKind::letter, BiasKind::letter_writer,
                       BiasKind::classifier_embedding, BiasKind::autoencoder_latent,
                       BiasKind::external})
        if (name == bias_kind_name(k)) return k;
    fail("config", "unknown bias kind '" + name + "'");
}

void GeneratorConfig::validate() const {
    if (frame_dim != kFrameDim)
        fail("config", "frame_dim must be 34, got " + std::to_string(frame_dim));
    if (hidden_layers < 1 || hidden_size < 1)
        fail("config", "generator needs at least one hidden layer and unit");
    if (dropout < 0.0 || dropout >= 1.0)
        fail("config", "dropout must be in [0, 1)");
    if (temperature <= 0.0) fail("config", "temperature must be positive");
    if (max_gen_len < 1 || max_gen_len > static_cast<int>(kMaxSteps))
        fail("config", "max_gen_len must be in 1..99");
    if (bias_hidden < 1) fail("config", "bias_hidden must be positive");
}

namespace {

std::string gru_name(int layer, const char* part) {
    return "gru" + std::to_string(layer) + "." + part;
}

GruCellWeights gru_weights(const ParamStore& params, int layer) {
    return {&params.value(gru_name(layer, "Wz")), &params.value(gru_name(layer, "Wr")),
            &params.value(gru_name(layer, "Wh")), &params.value(gru_name(layer, "Uz")),
            &params.value(gru_name(layer, "Ur")), &params.value(gru_name(layer, "Uh")),
            &params.value(gru_name(layer, "bz")), &params.value(gru_name(layer, "br")),
            &params.value(gru_name(layer, "bh"))};
}

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, SeededRng& rng) {
    Tensor t(std::move(shape));
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.uniform(-k, k);
    return t;
}

constexpr double kGreedyTemperature = 1e-6;

}  // namespace

GeneratorModel::GeneratorModel(GeneratorConfig config, BiasKind bias_kind,
                               std::size_t bias_dim, QuantizerSpec quantizer)
    : config_(config), bias_kind_(bias_kind), bias_dim_(bias_dim),
      quantizer_(std::move(quantizer)) {
    config_.validate();
    quantizer_.validate();
    if (bias_dim_ == 0) fail("config", "bias dimension must be positive");

    SeededRng rng(config_.seed);
    const std::size_t H = static_cast<std::size_t>(config_.hidden_size);
    const std::size_t F = static_cast<std::size_t>(config_.frame_dim);
    const std::size_t BH = static_cast<std::size_t>(config_.bias_hidden);

    params_.create("bias_mlp.W1", init_uniform({bias_dim_, BH}, bias_dim_, rng));
    params_.create("bias_mlp.b1", Tensor::zeros({BH}));
    params_.create("bias_mlp.W2", init_uniform({BH, F}, BH, rng));
    params_.create("bias_mlp.b2", Tensor::zeros({F}));
    for (int l = 0; l < config_.hidden_layers; ++l) {
        const std::size_t in = l == 0 ? F : H;
        for (const char* part : {"Wz", "Wr", "Wh"})
            params_.create(gru_name(l, part), init_uniform({in, H}, in, rng));
        for (const char* part : {"Uz", "Ur", "Uh"})
            params_.create(gru_name(l, part), init_uniform({H, H}, H, rng));
        for (const char* part : {"bz", "br", "bh"})
            params_.create(gru_name(l, part), Tensor::zeros({H}));
    }
    params_.create("head.W", init_uniform({H, F}, H, rng));
    params_.create("head.b", Tensor::zeros({F}));
}

namespace {

// Batched bias MLP forward; rows of `bias_matrix` are conditioning vectors.
Tensor bias_mlp_forward(const ParamStore& params, const Tensor& bias_matrix,
                        DenseCache* c1, DenseCache* c2) {
    Tensor hidden = dense_forward(bias_matrix, params.value("bias_mlp.W1"),
                                  params.value("bias_mlp.b1"), Activation::tanh_fn, c1);
    return dense_forward(hidden, params.value("bias_mlp.W2"),
                         params.value("bias_mlp.b2"), Activation::linear, c2);
}

void check_bias(const GeneratorModel& model, const BiasVector& bias) {
    if (bias.kind != model.bias_kind())
        fail("config", std::string("bias kind mismatch: model expects ") +
                           bias_kind_name(model.bias_kind()) + ", got " +
                           bias_kind_name(bias.kind));
    if (bias.values.size() != model.bias_dim())
        fail("shape", "bias dimension mismatch: expected " +
                          std::to_string(model.bias_dim()) + ", got " +
                          std::to_string(bias.values.size()));
}

void fill_frame_row(Tensor& x, std::size_t row, const Frame& f) {
    x.at(row, f.dir) = 1.0;
    x.at(row, kClassesPerBlock + f.speed) = 1.0;
}

Tensor block_of_row(const Tensor& logits, std::size_t row, int block) {
    Tensor out({static_cast<std::size_t>(kClassesPerBlock)});
    for (int i = 0; i < kClassesPerBlock; ++i)
        out.data[i] = logits.at(row, block * kClassesPerBlock + i);
    return out;
}

}  // namespace

Tensor GeneratorModel::bias_project(const BiasVector& bias) const {
    check_bias(*this, bias);
    Tensor row({1, bias_dim_}, std::vector<double>(bias.values));
    Tensor frame0 = bias_mlp_forward(params_, row, nullptr, nullptr);
    return Tensor({static_cast<std::size_t>(config_.frame_dim)},
                  std::move(frame0.data));
}

Tensor GeneratorModel::forward_teacher_forced(const Tensor& frame0,
                                              const EncodedTracing& frames) const {
    if (frames.frames.empty())
        fail("domain", "forward_teacher_forced: empty sequence");
    if (frame0.size() != static_cast<std::size_t>(config_.frame_dim))
        fail("shape", "frame0 must have 34 entries, got " + std::to_string(frame0.size()));
    const std::size_t N = frames.length();
    const std::size_t H = static_cast<std::size_t>(config_.hidden_size);
    const int L = config_.hidden_layers;

    std::vector<GruCellWeights> w;
    for (int l = 0; l < L; ++l) w.push_back(gru_weights(params_, l));
    std::vector<Tensor> h(L, Tensor::zeros({1, H}));

    Tensor logits({N, static_cast<std::size_t>(config_.frame_dim)});
    for (std::size_t t = 0; t < N; ++t) {
        Tensor x({1, static_cast<std::size_t>(config_.frame_dim)});
        if (t == 0)
            x.data = frame0.data;
        else
            fill_frame_row(x, 0, frames.frames[t - 1]);
        for (int l = 0; l < L; ++l) {
            h[l] = gru_cell_forward(x, h[l], w[l]);
            x = h[l];
        }
        Tensor row = dense_forward(x, params_.value("head.W"), params_.value("head.b"),
                                   Activation::linear);
        for (std::size_t c = 0; c < row.size(); ++c) logits.at(t, c) = row.data[c];
    }
    return logits;
}

double sequence_loss(const Tensor& logits, const EncodedTracing& targets,
                     Tensor* dlogits) {
    require_rank(logits, 2, "sequence_loss logits");
    if (logits.cols() != kFrameDim)
        fail("shape", "sequence_loss: logits must be N x 34");
    if (logits.rows() != targets.length())
        fail("shape", "sequence_loss: length mismatch, " +
                          std::to_string(logits.rows()) + " logit rows vs " +
                          std::to_string(targets.length()) + " target frames");

    // steps after the first EOS target are padding and carry no loss
    std::size_t effective = targets.length();
    for (std::size_t t = 0; t < targets.length(); ++t) {
        if (targets.frames[t].dir >= kEosClass || targets.frames[t].speed >= kEosClass) {
            effective = t + 1;
            break;
        }
    }

    if (dlogits) *dlogits = Tensor::zeros(logits.shape);
    double loss = 0.0;
    for (std::size_t t = 0; t < effective; ++t) {
        for (int block = 0; block < 2; ++block) {
            const std::size_t target =
                block == 0 ? targets.frames[t].dir : targets.frames[t].speed;
            NllResult res = nll_from_logits(block_of_row(logits, t, block), target);
            loss += res.loss;
            if (dlogits)
                for (int i = 0; i < kClassesPerBlock; ++i)
                    dlogits->at(t, block * kClassesPerBlock + i) = res.dlogits.data[i];
        }
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

double train_batch(GeneratorModel& model, const std::vector<const TrainItem*>& batch,
                   SeededRng& dropout_rng, std::size_t* steps_out) {
        if (batch.empty()) fail("domain", "train_batch: empty batch");
        ParamStore& params = model.params();
        const GeneratorConfig& cfg = model.config();
        const std::size_t B = batch.size();
        const std::size_t H = static_cast<std::size_t>(cfg.hidden_size);
        const std::size_t F = static_cast<std::size_t>(cfg.frame_dim);
        const int L = cfg.hidden_layers;
        const double inv_b = 1.0 / static_cast<double>(B);

        std::vector<GruCellWeights> w;
        for (int l = 0; l < L; ++l) w.push_back(gru_weights(params, l));

        std::size_t T = 0;
        for (const TrainItem* item : batch) T = std::max(T, item->tracing.length());

        Tensor bias_matrix({B, model.bias_dim()});
        for (std::size_t i = 0; i < B; ++i)
            for (std::size_t d = 0; d < model.bias_dim(); ++d)
                bias_matrix.at(i, d) = batch[i]->bias.values[d];
        DenseCache mlp1c, mlp2c;
        Tensor frame0 = bias_mlp_forward(params, bias_matrix, &mlp1c, &mlp2c);

        std::vector<Tensor> h(L, Tensor::zeros({B, H}));
        std::vector<std::vector<GruCellCache>> gcache(
            T, std::vector<GruCellCache>(static_cast<std::size_t>(L)));
        std::vector<std::vector<Tensor>> masks(
            T, std::vector<Tensor>(L > 1 ? static_cast<std::size_t>(L - 1) : 0));
        std::vector<DenseCache> headc(T);
        std::vector<Tensor> dlog(T);

        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t t = 0; t < T; ++t) {
            Tensor x({B, F});
            for (std::size_t i = 0; i < B; ++i) {
                const EncodedTracing& tr = batch[i]->tracing;
                if (t == 0)
                    for (std::size_t c = 0; c < F; ++c) x.at(i, c) = frame0.at(i, c);
                else if (t < tr.length())
                    fill_frame_row(x, i, tr.frames[t - 1]);
                // else: finished sequence, zero input; its loss rows stay zero
            }
            for (int l = 0; l < L; ++l) {
                h[l] = gru_cell_forward(x, h[l], w[l], &gcache[t][l]);
                x = h[l];
                if (l + 1 < L) {
                    masks[t][l] = dropout_mask({B, H}, cfg.dropout, dropout_rng);
                    x = hadamard(x, masks[t][l]);
                }
            }
            Tensor logits = dense_forward(x, params.value("head.W"),
                                          params.value("head.b"), Activation::linear,
                                          &headc[t]);
            dlog[t] = Tensor::zeros({B, F});
            for (std::size_t i = 0; i < B; ++i) {
                const EncodedTracing& tr = batch[i]->tracing;
                if (t >= tr.length()) continue;
                for (int block = 0; block < 2; ++block) {
                    const std::size_t target =
                        block == 0 ? tr.frames[t].dir : tr.frames[t].speed;
                    NllResult res =
                        nll_from_logits(block_of_row(logits, i, block), target);
                    loss_sum += res.loss;
                    for (int c = 0; c < kClassesPerBlock; ++c)
                        dlog[t].at(i, block * kClassesPerBlock + c) =
                            res.dlogits.data[c] * inv_b;
                }
                ++steps;
            }
        }

        // backpropagation through time
        std::vector<Tensor> dh_next(L, Tensor::zeros({B, H}));
        Tensor dframe0 = Tensor::zeros({B, F});
        for (std::size_t t = T; t-- > 0;) {
            DenseGrads hg =
                dense_backward(dlog[t], params.value("head.W"), Activation::linear,
                               headc[t]);
            params.accumulate_grad("head.W", hg.dW);
            params.accumulate_grad("head.b", hg.db);
            Tensor dcur = std::move(hg.dx);
            add_scaled(dcur, dh_next[L - 1]);
            for (int l = L - 1; l >= 0; --l) {
                GruCellGrads g = gru_cell_backward(dcur, w[l], gcache[t][l]);
                params.accumulate_grad(gru_name(l, "Wz"), g.dWz);
                params.accumulate_grad(gru_name(l, "Wr"), g.dWr);
                params.accumulate_grad(gru_name(l, "Wh"), g.dWh);
                params.accumulate_grad(gru_name(l, "Uz"), g.dUz);
                params.accumulate_grad(gru_name(l, "Ur"), g.dUr);
                params.accumulate_grad(gru_name(l, "Uh"), g.dUh);
                params.accumulate_grad(gru_name(l, "bz"), g.dbz);
                params.accumulate_grad(gru_name(l, "br"), g.dbr);
                params.accumulate_grad(gru_name(l, "bh"), g.dbh);
                dh_next[l] = std::move(g.dh_prev);
                if (l > 0) {
                    dcur = hadamard(g.dx, masks[t][l - 1]);
                    add_scaled(dcur, dh_next[l - 1]);
                } else if (t == 0) {
                    add_scaled(dframe0, g.dx);
                }
            }
        }
        DenseGrads g2 =
            dense_backward(dframe0, params.value("bias_mlp.W2"), Activation::linear,
                           mlp2c);
        DenseGrads g1 = dense_backward(g2.dx, params.value("bias_mlp.W1"),
                                       Activation::tanh_fn, mlp1c);
        params.accumulate_grad("bias_mlp.W2", g2.dW);
        params.accumulate_grad("bias_mlp.b2", g2.db);
        params.accumulate_grad("bias_mlp.W1", g1.dW);
        params.accumulate_grad("bias_mlp.b1", g1.db);

        if (steps_out) *steps_out += steps;
        return loss_sum;
}

namespace {

void check_items(const GeneratorModel& model, const std::vector<TrainItem>& items) {
    for (const TrainItem& item : items) {
        check_bias(model, item.bias);
        item.tracing.validate();
    }
}

}  // namespace

double evaluate_loss(const GeneratorModel& model, const std::vector<TrainItem>& items) {
    check_items(model, items);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (const TrainItem& item : items) {
        Tensor frame0 = model.bias_project(item.bias);
        Tensor logits = model.forward_teacher_forced(frame0, item.tracing);
        loss_sum += sequence_loss(logits, item.tracing);
        steps += item.tracing.length();
    }
    if (steps == 0) fail("domain", "evaluate_loss: no target steps");
    return loss_sum / static_cast<double>(steps);
}

TrainReport train_generator(GeneratorModel& model, const std::vector<TrainItem>& train,
                            const std::vector<TrainItem>& validation,
                            const TrainOptions& options) {
    if (options.epochs < 0 || options.batch_size < 1)
        fail("config", "train_generator: bad epochs/batch_size");
    if (train.empty()) fail("domain", "train_generator: empty training set");
    check_items(model, train);
    check_items(model, validation);

    TrainReport report;
    report.seed = model.config().seed;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        SeededRng shuffle_rng =
            SeededRng(model.config().seed).fork(0xE50C0000ULL + epoch);
        SeededRng dropout_rng =
            SeededRng(model.config().seed).fork(0xD7050000ULL + epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(options.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
            std::vector<const TrainItem*> batch;
            batch.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) batch.push_back(&train[order[k]]);
            model.params().zero_grads();
            loss_sum += trainer.train_batch(batch, dropout_rng, &steps);
            model.params().adam_step(model.config().lr);
        }
        const double train_loss = loss_sum / static_cast<double>(steps);
        report.train_loss.push_back(train_loss);
        report.val_loss.push_back(validation.empty() ? train_loss
                                                     : evaluate_loss(model, validation));
        report.epoch_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (options.checkpoint_dir)
            save_checkpoint(model, *options.checkpoint_dir + "/checkpoint.json");
        if (options.verbose)
            std::fprintf(stderr, "epoch %3d train %.4f val %.4f (%.1fs)\n", epoch,
                         train_loss, report.val_loss.back(),
                         report.epoch_seconds.back());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

std::size_t sample_categorical(const Tensor& probs, SeededRng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs.data[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;
}

std::size_t argmax_index(const double* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

EncodedTracing GeneratorModel::sample(const BiasVector& bias, double temperature,
                                      SeededRng& rng) const {
    check_bias(*this, bias);
    if (temperature <= 0.0) fail("domain", "sample: temperature must be positive");
    const bool greedy = temperature < kGreedyTemperature;
    const std::size_t H = static_cast<std::size_t>(config_.hidden_size);
    const std::size_t F = static_cast<std::size_t>(config_.frame_dim);
    const int L = config_.hidden_layers;

    std::vector<GruCellWeights> w;
    for (int l = 0; l < L; ++l) w.push_back(gru_weights(params_, l));
    std::vector<Tensor> h(L, Tensor::zeros({1, H}));

    Tensor frame0 = bias_project(bias);
    Tensor x({1, F}, std::vector<double>(frame0.data));

    EncodedTracing out;
    for (int step = 0; step < config_.max_gen_len; ++step) {
        Tensor a = x;
        for (int l = 0; l < L; ++l) {
            h[l] = gru_cell_forward(a, h[l], w[l]);
            a = h[l];
        }
        Tensor logits = dense_forward(a, params_.value("head.W"),
                                      params_.value("head.b"), Activation::linear);

        // direction block decides termination
        Tensor dir_logits({static_cast<std::size_t>(kClassesPerBlock)});
        for (int i = 0; i < kClassesPerBlock; ++i)
            dir_logits.data[i] = logits.data[i] / temperature;
        std::size_t dir;
        if (greedy)
            dir = argmax_index(logits.data.data(), kClassesPerBlock);
        else
            dir = sample_categorical(softmax(dir_logits), rng);
        if (dir == kEosClass) break;

        // speed block; EOS is excluded mid-sequence (renormalized draw)
        Tensor speed_logits({static_cast<std::size_t>(kSpeedLevels)});
        for (int i = 0; i < kSpeedLevels; ++i)
            speed_logits.data[i] = logits.data[kClassesPerBlock + i] / temperature;
        std::size_t speed;
        if (greedy)
            speed = argmax_index(logits.data.data() + kClassesPerBlock, kSpeedLevels);
        else
            speed = sample_categorical(softmax(speed_logits), rng);

        out.frames.push_back(
            {static_cast<std::uint8_t>(dir), static_cast<std::uint8_t>(speed)});
        x.zero();
        fill_frame_row(x, 0, out.frames.back());
    }
    out.frames.push_back({kEosClass, kEosClass});
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

json config_to_json(const GeneratorConfig& c) {
    json j;
    j["hidden_layers"] = c.hidden_layers;
    j["hidden_size"] = c.hidden_size;
    j["dropout"] = c.dropout;
    j["lr"] = c.lr;
    j["frame_dim"] = c.frame_dim;
    j["max_gen_len"] = c.max_gen_len;
    j["temperature"] = c.temperature;
    j["seed"] = c.seed;
    j["bias_hidden"] = c.bias_hidden;
    return j;
}

GeneratorConfig config_from_json(const json& j) {
    GeneratorConfig c;
    c.hidden_layers = j.at("hidden_layers").get<int>();
    c.hidden_size = j.at("hidden_size").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.lr = j.at("lr").get<double>();
    c.frame_dim = j.at("frame_dim").get<int>();
    c.max_gen_len = j.at("max_gen_len").get<int>();
    c.temperature = j.at("temperature").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bias_hidden = j.at("bias_hidden").get<int>();
    c.validate();
    return c;
}

}  // namespace

void save_checkpoint(const GeneratorModel& model, const std::string& path) {
    json j;
    j["format"] = "strokegen-checkpoint";
    j["version"] = 1;
    j["model_kind"] = "generator";
    j["config"] = config_to_json(model.config_);
    j["bias_kind"] = bias_kind_name(model.bias_kind_);
    j["bias_dim"] = model.bias_dim_;
    j["corpus_seed"] = model.corpus_seed_;
    j["quantizer"] = quantizer_to_json(model.quantizer_);
    j["params"] = params_to_json(model.params_);
    write_json_file(j, path);
}

GeneratorModel load_checkpoint(const std::string& path) {
    const json j = read_json_file(path);
    if (j.value("format", "") != "strokegen-checkpoint" || j.value("version", 0) != 1)
        fail("format", path + " is not a strokegen-checkpoint v1 file");
    if (j.value("model_kind", "") != "generator")
        fail("format", path + " holds a " + j.value("model_kind", "?") +
                           " model, expected a generator");
    GeneratorModel model;
    model.config_ = config_from_json(j.at("config"));
    model.bias_kind_ = bias_kind_from_name(j.at("bias_kind").get<std::string>());
    model.bias_dim_ = j.at("bias_dim").get<std::size_t>();
    model.corpus_seed_ = j.at("corpus_seed").get<std::uint64_t>();
    model.quantizer_ = quantizer_from_json(j.at("quantizer"));
    params_from_json(j.at("params"), model.params_);
    return model;
}

}  // namespace strokegen
