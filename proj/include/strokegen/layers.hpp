#pragma once

#include <cstdint>
#include <vector>

#include "strokegen/rng.hpp"
#include "strokegen/tensor.hpp"

namespace strokegen {

// ---------------------------------------------------------------------------
// Dense layer
// ---------------------------------------------------------------------------

enum class Activation { linear, tanh_fn, relu, sigmoid };

struct DenseCache {
    Tensor x;  // input [B x in]
    Tensor y;  // post-activation output [B x out]
};

// y = act(x W + b); x is [B x in], W [in x out], b [out].
Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b,
                     Activation act, DenseCache* cache = nullptr);

struct DenseGrads {
    Tensor dx, dW, db;
};

DenseGrads dense_backward(const Tensor& dy, const Tensor& W, Activation act,
                          const DenseCache& cache);

// ---------------------------------------------------------------------------
// GRU cell: z = sig(xWz + hUz + bz), r = sig(xWr + hUr + br),
// hcand = tanh(xWh + (r . h)Uh + bh), h' = (1-z) . h + z . hcand
// ---------------------------------------------------------------------------

struct GruCellWeights {
    const Tensor* Wz;
    const Tensor* Wr;
    const Tensor* Wh;  // input x hidden
    const Tensor* Uz;
    const Tensor* Ur;
    const Tensor* Uh;  // hidden x hidden
    const Tensor* bz;
    const Tensor* br;
    const Tensor* bh;  // hidden
};

struct GruCellCache {
    Tensor x, h_prev, z, r, hcand, rh;  // rh = r . h_prev
};

Tensor gru_cell_forward(const Tensor& x, const Tensor& h_prev,
                        const GruCellWeights& w, GruCellCache* cache = nullptr);

struct GruCellGrads {
    Tensor dx, dh_prev;
    Tensor dWz, dWr, dWh, dUz, dUr, dUh, dbz, dbr, dbh;
};

GruCellGrads gru_cell_backward(const Tensor& dh, const GruCellWeights& w,
                               const GruCellCache& cache);

// ---------------------------------------------------------------------------
// Softmax / NLL
// ---------------------------------------------------------------------------

// Max-subtraction stabilized softmax along `axis` (-1 = last). Rank 1 or 2.
Tensor softmax(const Tensor& logits, int axis = -1);

struct NllResult {
    double loss;
    Tensor dlogits;  // softmax(logits) - onehot(target)
};

// loss = -log softmax(logits)[target] for a rank-1 logit vector.
NllResult nll_from_logits(const Tensor& logits, std::size_t target_class);

// ---------------------------------------------------------------------------
// Conv / pool / batchnorm on [N, C, H, W] tensors (stride 1, no padding)
// ---------------------------------------------------------------------------

struct Conv2dCache {
    Tensor x;
};

// x [N,Cin,H,W], kernel [Cout,Cin,kH,kW], bias [Cout] -> [N,Cout,H-kH+1,W-kW+1]
Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      Conv2dCache* cache = nullptr);

struct Conv2dGrads {
    Tensor dx, dkernel, dbias;
};

Conv2dGrads conv2d_backward(const Tensor& dy, const Tensor& kernel,
                            const Conv2dCache& cache);

struct MaxPoolCache {
    std::vector<std::size_t> in_shape;
    std::vector<std::size_t> argmax;  // flat input index per output element
};

Tensor maxpool2x2_forward(const Tensor& x, MaxPoolCache* cache = nullptr);
Tensor maxpool2x2_backward(const Tensor& dy, const MaxPoolCache& cache);

enum class BatchNormMode { train, infer };

struct BatchNormState {
    Tensor running_mean;  // [C]
    Tensor running_var;   // [C]
    double momentum = 0.9;
    double eps = 1e-5;
};

struct BatchNormCache {
    Tensor xhat;     // normalized input
    Tensor inv_std;  // [C]
};

// Per-channel batchnorm; accepts [N,C,H,W] or [N,C]. Train mode normalizes
// with batch statistics and updates the running ones; infer mode uses the
// running statistics. Train mode requires batch size >= 2.
Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         BatchNormState& state, BatchNormMode mode,
                         BatchNormCache* cache = nullptr);

struct BatchNormGrads {
    Tensor dx, dgamma, dbeta;
};

BatchNormGrads batchnorm_backward(const Tensor& dy, const Tensor& gamma,
                                  const BatchNormCache& cache);

// ---------------------------------------------------------------------------
// Dropout (inverted: kept units scaled by 1/(1-p) at train time)
// ---------------------------------------------------------------------------

Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, SeededRng& rng);

}  // namespace strokegen
