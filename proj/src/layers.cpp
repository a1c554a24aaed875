#include "strokegen/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strokegen/error.hpp"

namespace strokegen {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void apply_activation(Tensor& t, Activation act) {
    switch (act) {
        case Activation::linear:
            return;
        case Activation::tanh_fn:
            for (double& v : t.data) v = std::tanh(v);
            return;
        case Activation::relu:
            for (double& v : t.data) v = v > 0.0 ? v : 0.0;
            return;
        case Activation::sigmoid:
            for (double& v : t.data) v = sigmoid(v);
            return;
    }
}

// Derivative of the activation expressed through its output value.
double activation_deriv_from_output(Activation act, double y) {
    switch (act) {
        case Activation::linear:
            return 1.0;
        case Activation::tanh_fn:
            return 1.0 - y * y;
        case Activation::relu:
            return y > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid:
            return y * (1.0 - y);
    }
    return 1.0;
}

void add_row_bias(Tensor& t, const Tensor& b) {
    const std::size_t rows = t.rows(), cols = t.cols();
    if (b.size() != cols)
        fail("shape", "bias length " + std::to_string(b.size()) +
                          " does not match output width " + std::to_string(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t.data[r * cols + c] += b.data[c];
}

Tensor column_sums(const Tensor& t) {
    Tensor out({t.cols()});
    for (std::size_t r = 0; r < t.rows(); ++r)
        for (std::size_t c = 0; c < t.cols(); ++c) out.data[c] += t.at(r, c);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

Tensor dense_forward(const Tensor& x, const Tensor& W, const Tensor& b,
                     Activation act, DenseCache* cache) {
    Tensor y = matmul(x, W);
    add_row_bias(y, b);
    apply_activation(y, act);
    if (cache) {
        cache->x = x;
        cache->y = y;
    }
    return y;
}

DenseGrads dense_backward(const Tensor& dy, const Tensor& W, Activation act,
                          const DenseCache& cache) {
    require_same_shape(dy, cache.y, "dense_backward dy");
    Tensor dz(dy.shape);
    for (std::size_t i = 0; i < dy.size(); ++i)
        dz.data[i] = dy.data[i] * activation_deriv_from_output(act, cache.y.data[i]);

    DenseGrads g;
    g.dx = Tensor::zeros(cache.x.shape);
    g.dW = Tensor::zeros(W.shape);
    add_matmul(g.dx, dz, false, W, true);
    add_matmul(g.dW, cache.x, true, dz, false);
    g.db = column_sums(dz);
    return g;
}

// ---------------------------------------------------------------------------
// GRU cell
// ---------------------------------------------------------------------------

Tensor gru_cell_forward(const Tensor& x, const Tensor& h_prev,
                        const GruCellWeights& w, GruCellCache* cache) {
    require_rank(x, 2, "gru_cell_forward x");
    require_rank(h_prev, 2, "gru_cell_forward h_prev");
    if (x.rows() != h_prev.rows())
        fail("shape", "gru_cell_forward: batch dimensions disagree, " +
                          shape_string(x.shape) + " vs " + shape_string(h_prev.shape));

    Tensor az = matmul(x, *w.Wz);
    add_matmul(az, h_prev, false, *w.Uz, false);
    add_row_bias(az, *w.bz);
    Tensor ar = matmul(x, *w.Wr);
    add_matmul(ar, h_prev, false, *w.Ur, false);
    add_row_bias(ar, *w.br);

    Tensor z(az.shape), r(ar.shape);
    for (std::size_t i = 0; i < az.size(); ++i) z.data[i] = sigmoid(az.data[i]);
    for (std::size_t i = 0; i < ar.size(); ++i) r.data[i] = sigmoid(ar.data[i]);

    Tensor rh = hadamard(r, h_prev);
    Tensor ah = matmul(x, *w.Wh);
    add_matmul(ah, rh, false, *w.Uh, false);
    add_row_bias(ah, *w.bh);
    Tensor hcand(ah.shape);
    for (std::size_t i = 0; i < ah.size(); ++i) hcand.data[i] = std::tanh(ah.data[i]);

    Tensor h(h_prev.shape);
    for (std::size_t i = 0; i < h.size(); ++i)
        h.data[i] = (1.0 - z.data[i]) * h_prev.data[i] + z.data[i] * hcand.data[i];

    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->hcand = std::move(hcand);
        cache->rh = std::move(rh);
    }
    return h;
}

GruCellGrads gru_cell_backward(const Tensor& dh, const GruCellWeights& w,
                               const GruCellCache& cache) {
    require_same_shape(dh, cache.h_prev, "gru_cell_backward dh");
    const Tensor& z = cache.z;
    const Tensor& r = cache.r;
    const Tensor& hcand = cache.hcand;
    const Tensor& h_prev = cache.h_prev;

    GruCellGrads g;
    g.dx = Tensor::zeros(cache.x.shape);
    g.dh_prev = Tensor::zeros(h_prev.shape);
    g.dWz = Tensor::zeros(w.Wz->shape);
    g.dWr = Tensor::zeros(w.Wr->shape);
    g.dWh = Tensor::zeros(w.Wh->shape);
    g.dUz = Tensor::zeros(w.Uz->shape);
    g.dUr = Tensor::zeros(w.Ur->shape);
    g.dUh = Tensor::zeros(w.Uh->shape);

    Tensor dz(dh.shape), dhcand(dh.shape);
    for (std::size_t i = 0; i < dh.size(); ++i) {
        dz.data[i] = dh.data[i] * (hcand.data[i] - h_prev.data[i]);
        dhcand.data[i] = dh.data[i] * z.data[i];
        g.dh_prev.data[i] = dh.data[i] * (1.0 - z.data[i]);
    }

    // candidate branch
    Tensor dah(dh.shape);
    for (std::size_t i = 0; i < dh.size(); ++i)
        dah.data[i] = dhcand.data[i] * (1.0 - hcand.data[i] * hcand.data[i]);
    add_matmul(g.dWh, cache.x, true, dah, false);
    add_matmul(g.dUh, cache.rh, true, dah, false);
    g.dbh = column_sums(dah);
    add_matmul(g.dx, dah, false, *w.Wh, true);
    Tensor drh = Tensor::zeros(dh.shape);
    add_matmul(drh, dah, false, *w.Uh, true);

    Tensor dr(dh.shape);
    for (std::size_t i = 0; i < dh.size(); ++i) {
        dr.data[i] = drh.data[i] * h_prev.data[i];
        g.dh_prev.data[i] += drh.data[i] * r.data[i];
    }

    // reset gate
    Tensor dar(dh.shape);
    for (std::size_t i = 0; i < dh.size(); ++i)
        dar.data[i] = dr.data[i] * r.data[i] * (1.0 - r.data[i]);
    add_matmul(g.dWr, cache.x, true, dar, false);
    add_matmul(g.dUr, h_prev, true, dar, false);
    g.dbr = column_sums(dar);
    add_matmul(g.dx, dar, false, *w.Wr, true);
    add_matmul(g.dh_prev, dar, false, *w.Ur, true);

    // update gate
    Tensor daz(dh.shape);
    for (std::size_t i = 0; i < dh.size(); ++i)
        daz.data[i] = dz.data[i] * z.data[i] * (1.0 - z.data[i]);
    add_matmul(g.dWz, cache.x, true, daz, false);
    add_matmul(g.dUz, h_prev, true, daz, false);
    g.dbz = column_sums(daz);
    add_matmul(g.dx, daz, false, *w.Wz, true);
    add_matmul(g.dh_prev, daz, false, *w.Uz, true);

    return g;
}

// ---------------------------------------------------------------------------
// Softmax / NLL
// ---------------------------------------------------------------------------

namespace {

void softmax_span(const double* in, double* out, std::size_t n, std::size_t stride) {
    double mx = in[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, in[i * stride]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i * stride] = std::exp(in[i * stride] - mx);
        sum += out[i * stride];
    }
    for (std::size_t i = 0; i < n; ++i) out[i * stride] /= sum;
}

}  // namespace

Tensor softmax(const Tensor& logits, int axis) {
    if (!logits.all_finite()) fail("domain", "softmax: non-finite logits");
    Tensor out(logits.shape);
    if (logits.rank() == 1) {
        softmax_span(logits.data.data(), out.data.data(), logits.size(), 1);
        return out;
    }
    if (logits.rank() != 2) fail("shape", "softmax: rank must be 1 or 2");
    const std::size_t rows = logits.rows(), cols = logits.cols();
    int ax = axis < 0 ? 2 + axis : axis;
    if (ax == 1) {
        for (std::size_t r = 0; r < rows; ++r)
            softmax_span(logits.data.data() + r * cols, out.data.data() + r * cols, cols, 1);
    } else if (ax == 0) {
        for (std::size_t c = 0; c < cols; ++c)
            softmax_span(logits.data.data() + c, out.data.data() + c, rows, cols);
    } else {
        fail("shape", "softmax: axis out of range");
    }
    return out;
}

NllResult nll_from_logits(const Tensor& logits, std::size_t target_class) {
    require_rank(logits, 1, "nll_from_logits");
    if (target_class >= logits.size())
        fail("index", "nll_from_logits: target " + std::to_string(target_class) +
                          " out of range for " + std::to_string(logits.size()) + " classes");
    // loss = logsumexp(logits) - logits[target], computed with max subtraction
    double mx = logits.data[0];
    for (double v : logits.data) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits.data) sum += std::exp(v - mx);
    NllResult res;
    res.loss = std::log(sum) + mx - logits.data[target_class];
    res.dlogits = Tensor(logits.shape);
    for (std::size_t i = 0; i < logits.size(); ++i)
        res.dlogits.data[i] = std::exp(logits.data[i] - mx) / sum;
    res.dlogits.data[target_class] -= 1.0;
    return res;
}

// ---------------------------------------------------------------------------
// Conv2d
// ---------------------------------------------------------------------------

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
    require_rank(x, 4, "conv2d x");
    require_rank(kernel, 4, "conv2d kernel");
    if (x.shape[1] != kernel.shape[1])
        fail("shape", "conv2d: input channels " + std::to_string(x.shape[1]) +
                          " do not match kernel channels " + std::to_string(kernel.shape[1]));
    if (kernel.shape[2] > x.shape[2] || kernel.shape[3] > x.shape[3])
        fail("shape", "conv2d: kernel " + shape_string(kernel.shape) +
                          " larger than input " + shape_string(x.shape));
    if (bias.size() != kernel.shape[0])
        fail("shape", "conv2d: bias length does not match output channels");
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                      Conv2dCache* cache) {
    check_conv_shapes(x, kernel, bias);
    const std::size_t N = x.shape[0], Cin = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t Cout = kernel.shape[0], kH = kernel.shape[2], kW = kernel.shape[3];
    const std::size_t OH = H - kH + 1, OW = W - kW + 1;
    Tensor y({N, Cout, OH, OW});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t co = 0; co < Cout; ++co)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    double acc = bias.data[co];
                    for (std::size_t ci = 0; ci < Cin; ++ci)
                        for (std::size_t kh = 0; kh < kH; ++kh) {
                            const double* xrow =
                                &x.data[((n * Cin + ci) * H + oh + kh) * W + ow];
                            const double* krow =
                                &kernel.data[((co * Cin + ci) * kH + kh) * kW];
                            for (std::size_t kw = 0; kw < kW; ++kw)
                                acc += xrow[kw] * krow[kw];
                        }
                    y.data[((n * Cout + co) * OH + oh) * OW + ow] = acc;
                }
    if (cache) cache->x = x;
    return y;
}

Conv2dGrads conv2d_backward(const Tensor& dy, const Tensor& kernel,
                            const Conv2dCache& cache) {
    const Tensor& x = cache.x;
    const std::size_t N = x.shape[0], Cin = x.shape[1], H = x.shape[2], W = x.shape[3];
    const std::size_t Cout = kernel.shape[0], kH = kernel.shape[2], kW = kernel.shape[3];
    const std::size_t OH = H - kH + 1, OW = W - kW + 1;
    require_rank(dy, 4, "conv2d_backward dy");
    if (dy.shape != std::vector<std::size_t>{N, Cout, OH, OW})
        fail("shape", "conv2d_backward: dy shape " + shape_string(dy.shape) +
                          " does not match forward output");

    Conv2dGrads g;
    g.dx = Tensor::zeros(x.shape);
    g.dkernel = Tensor::zeros(kernel.shape);
    g.dbias = Tensor({Cout});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t co = 0; co < Cout; ++co)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    const double d = dy.data[((n * Cout + co) * OH + oh) * OW + ow];
                    g.dbias.data[co] += d;
                    for (std::size_t ci = 0; ci < Cin; ++ci)
                        for (std::size_t kh = 0; kh < kH; ++kh) {
                            const double* xrow =
                                &x.data[((n * Cin + ci) * H + oh + kh) * W + ow];
                            double* dxrow =
                                &g.dx.data[((n * Cin + ci) * H + oh + kh) * W + ow];
                            const double* krow =
                                &kernel.data[((co * Cin + ci) * kH + kh) * kW];
                            double* dkrow =
                                &g.dkernel.data[((co * Cin + ci) * kH + kh) * kW];
                            for (std::size_t kw = 0; kw < kW; ++kw) {
                                dkrow[kw] += xrow[kw] * d;
                                dxrow[kw] += krow[kw] * d;
                            }
                        }
                }
    return g;
}

// ---------------------------------------------------------------------------
// Max pool 2x2
// ---------------------------------------------------------------------------

Tensor maxpool2x2_forward(const Tensor& x, MaxPoolCache* cache) {
    require_rank(x, 4, "maxpool2x2 x");
    const std::size_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    if (H < 2 || W < 2) fail("shape", "maxpool2x2: input smaller than window");
    const std::size_t OH = H / 2, OW = W / 2;
    Tensor y({N, C, OH, OW});
    if (cache) {
        cache->in_shape = x.shape;
        cache->argmax.assign(y.size(), 0);
    }
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t oh = 0; oh < OH; ++oh)
                for (std::size_t ow = 0; ow < OW; ++ow) {
                    std::size_t best = ((n * C + c) * H + 2 * oh) * W + 2 * ow;
                    double bv = x.data[best];
                    for (std::size_t dh = 0; dh < 2; ++dh)
                        for (std::size_t dw = 0; dw < 2; ++dw) {
                            std::size_t idx =
                                ((n * C + c) * H + 2 * oh + dh) * W + 2 * ow + dw;
                            if (x.data[idx] > bv) {
                                bv = x.data[idx];
                                best = idx;
                            }
                        }
                    const std::size_t out_idx = ((n * C + c) * OH + oh) * OW + ow;
                    y.data[out_idx] = bv;
                    if (cache) cache->argmax[out_idx] = best;
                }
    return y;
}

Tensor maxpool2x2_backward(const Tensor& dy, const MaxPoolCache& cache) {
    Tensor dx(cache.in_shape);
    if (dy.size() != cache.argmax.size())
        fail("shape", "maxpool2x2_backward: dy does not match cached forward");
    for (std::size_t i = 0; i < dy.size(); ++i) dx.data[cache.argmax[i]] += dy.data[i];
    return dx;
}

// ---------------------------------------------------------------------------
// Batchnorm
// ---------------------------------------------------------------------------

namespace {

struct BnLayout {
    std::size_t n, c, spatial;  // elements = n * c * spatial
};

BnLayout bn_layout(const Tensor& x) {
    if (x.rank() == 2) return {x.shape[0], x.shape[1], 1};
    if (x.rank() == 4) return {x.shape[0], x.shape[1], x.shape[2] * x.shape[3]};
    fail("shape", "batchnorm: expected rank 2 or 4, got " + shape_string(x.shape));
}

inline std::size_t bn_index(const BnLayout& l, std::size_t n, std::size_t c,
                            std::size_t s) {
    return (n * l.c + c) * l.spatial + s;
}

}  // namespace

Tensor batchnorm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         BatchNormState& state, BatchNormMode mode,
                         BatchNormCache* cache) {
    const BnLayout l = bn_layout(x);
    if (gamma.size() != l.c || beta.size() != l.c)
        fail("shape", "batchnorm: gamma/beta length does not match channel count");
    if (state.running_mean.size() != l.c || state.running_var.size() != l.c)
        fail("shape", "batchnorm: running statistics do not match channel count");
    if (mode == BatchNormMode::train && l.n < 2)
        fail("domain", "batchnorm: train mode requires batch size >= 2, got " +
                           std::to_string(l.n));

    const double m = static_cast<double>(l.n * l.spatial);
    Tensor mean({l.c}), var({l.c});
    if (mode == BatchNormMode::train) {
        for (std::size_t n = 0; n < l.n; ++n)
            for (std::size_t c = 0; c < l.c; ++c)
                for (std::size_t s = 0; s < l.spatial; ++s)
                    mean.data[c] += x.data[bn_index(l, n, c, s)];
        for (std::size_t c = 0; c < l.c; ++c) mean.data[c] /= m;
        for (std::size_t n = 0; n < l.n; ++n)
            for (std::size_t c = 0; c < l.c; ++c)
                for (std::size_t s = 0; s < l.spatial; ++s) {
                    const double d = x.data[bn_index(l, n, c, s)] - mean.data[c];
                    var.data[c] += d * d;
                }
        for (std::size_t c = 0; c < l.c; ++c) var.data[c] /= m;
        for (std::size_t c = 0; c < l.c; ++c) {
            state.running_mean.data[c] = state.momentum * state.running_mean.data[c] +
                                         (1.0 - state.momentum) * mean.data[c];
            state.running_var.data[c] = state.momentum * state.running_var.data[c] +
                                        (1.0 - state.momentum) * var.data[c];
        }
    } else {
        mean = state.running_mean;
        var = state.running_var;
    }

    Tensor inv_std({l.c});
    for (std::size_t c = 0; c < l.c; ++c)
        inv_std.data[c] = 1.0 / std::sqrt(var.data[c] + state.eps);

    Tensor y(x.shape), xhat(x.shape);
    for (std::size_t n = 0; n < l.n; ++n)
        for (std::size_t c = 0; c < l.c; ++c)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = bn_index(l, n, c, s);
                xhat.data[i] = (x.data[i] - mean.data[c]) * inv_std.data[c];
                y.data[i] = gamma.data[c] * xhat.data[i] + beta.data[c];
            }
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

BatchNormGrads batchnorm_backward(const Tensor& dy, const Tensor& gamma,
                                  const BatchNormCache& cache) {
    const BnLayout l = bn_layout(dy);
    require_same_shape(dy, cache.xhat, "batchnorm_backward dy");
    const double m = static_cast<double>(l.n * l.spatial);

    BatchNormGrads g;
    g.dx = Tensor(dy.shape);
    g.dgamma = Tensor({l.c});
    g.dbeta = Tensor({l.c});
    Tensor sum_dxhat({l.c}), sum_dxhat_xhat({l.c});
    for (std::size_t n = 0; n < l.n; ++n)
        for (std::size_t c = 0; c < l.c; ++c)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = bn_index(l, n, c, s);
                g.dgamma.data[c] += dy.data[i] * cache.xhat.data[i];
                g.dbeta.data[c] += dy.data[i];
                const double dxhat = dy.data[i] * gamma.data[c];
                sum_dxhat.data[c] += dxhat;
                sum_dxhat_xhat.data[c] += dxhat * cache.xhat.data[i];
            }
    for (std::size_t n = 0; n < l.n; ++n)
        for (std::size_t c = 0; c < l.c; ++c)
            for (std::size_t s = 0; s < l.spatial; ++s) {
                const std::size_t i = bn_index(l, n, c, s);
                const double dxhat = dy.data[i] * gamma.data[c];
                g.dx.data[i] = cache.inv_std.data[c] / m *
                               (m * dxhat - sum_dxhat.data[c] -
                                cache.xhat.data[i] * sum_dxhat_xhat.data[c]);
            }
    return g;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

Tensor dropout_mask(const std::vector<std::size_t>& shape, double p, SeededRng& rng) {
    if (p < 0.0 || p >= 1.0)
        fail("domain", "dropout probability must be in [0, 1), got " + std::to_string(p));
    Tensor mask(shape);
    if (p == 0.0) {
        mask.fill(1.0);
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - p);
    for (double& v : mask.data) v = rng.uniform() < p ? 0.0 : keep_scale;
    return mask;
}

}  // namespace strokegen
