#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strokegen/bias.hpp"
#include "strokegen/codec.hpp"
#include "strokegen/param_store.hpp"
#include "strokegen/rng.hpp"

namespace strokegen {

struct GeneratorConfig {
    int hidden_layers = 3;
    int hidden_size = 256;
    double dropout = 0.3;
    double lr = 1e-3;
    int frame_dim = kFrameDim;  // 34
    int max_gen_len = 99;
    double temperature = 1.0;
    std::uint64_t seed = 1;
    int bias_hidden = 64;  // hidden width of the bias projection MLP

    void validate() const;
};

// Bias-conditioned autoregressive sequence model: bias projection MLP,
// stacked GRU, and a linear head whose 34 logits split into a 17-class
// direction block [0,17) and a 17-class speed block [17,34).
class GeneratorModel {
public:
    GeneratorModel() = default;
    GeneratorModel(GeneratorConfig config, BiasKind bias_kind, std::size_t bias_dim,
                   QuantizerSpec quantizer);

    const GeneratorConfig& config() const { return config_; }
    BiasKind bias_kind() const { return bias_kind_; }
    std::size_t bias_dim() const { return bias_dim_; }
    const QuantizerSpec& quantizer() const { return quantizer_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::uint64_t corpus_seed() const { return corpus_seed_; }
    void set_corpus_seed(std::uint64_t s) { corpus_seed_ = s; }

    // Projects the conditioning vector to frame 0. Output is a dense rank-1
    // tensor of 34 values.
    Tensor bias_project(const BiasVector& bias) const;

    // Consumes [frame_0, s_1 .. s_{N-1}] and emits one 34-wide logit row per
    // frame, predicting s_1 .. s_N. Hidden states start at zero; no dropout.
    Tensor forward_teacher_forced(const Tensor& frame0, const EncodedTracing& frames) const;

    // Samples a tracing: two temperature-scaled categorical draws per step,
    // fed back as the next input, until the direction block draws EOS or
    // max_gen_len steps are reached; a terminal EOS frame is then appended.
    // Temperatures below 1e-6 mean greedy argmax.
    EncodedTracing sample(const BiasVector& bias, double temperature,
                          SeededRng& rng) const;

private:
    friend struct GeneratorTrainer;
    friend void save_checkpoint(const GeneratorModel&, const std::string&);
    friend GeneratorModel load_checkpoint(const std::string&);

    GeneratorConfig config_;
    BiasKind bias_kind_ = BiasKind::external;
    std::size_t bias_dim_ = 0;
    QuantizerSpec quantizer_;
    ParamStore params_;
    std::uint64_t corpus_seed_ = 0;
};

// Summed negative log likelihood (direction + speed) of the targets under the
// per-step logits. Steps after the first EOS target are masked out. Returns
// the scalar loss; when dlogits is non-null it receives the gradient with the
// same masking.
double sequence_loss(const Tensor& logits, const EncodedTracing& targets,
                     Tensor* dlogits = nullptr);

struct TrainItem {
    BiasVector bias;
    EncodedTracing tracing;
};

struct TrainOptions {
    int epochs = 30;
    int batch_size = 32;
    std::optional<std::string> checkpoint_dir;  // per-epoch checkpoints when set
    bool verbose = false;
};

struct TrainReport {
    std::vector<double> train_loss;  // mean per target step, one entry per epoch
    std::vector<double> val_loss;    // dropout disabled
    std::vector<double> epoch_seconds;
    std::uint64_t seed = 0;
};

// Adam updates with teacher forcing and dropout between stacked layers;
// shuffling, dropout and initialization all derive from the model seed.
TrainReport train_generator(GeneratorModel& model, const std::vector<TrainItem>& train,
                            const std::vector<TrainItem>& validation,
                            const TrainOptions& options);

// Mean per-step validation loss without dropout.
double evaluate_loss(const GeneratorModel& model, const std::vector<TrainItem>& items);

// Versioned JSON checkpoint: config, bias kind, quantizer, every named
// parameter tensor with optimizer state, and the corpus seed. Values
// round-trip bit-exactly.
void save_checkpoint(const GeneratorModel& model, const std::string& path);
GeneratorModel load_checkpoint(const std::string& path);

}  // namespace strokegen
