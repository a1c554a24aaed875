#include "strokegen/param_store.hpp"

#include <cmath>

#include "strokegen/error.hpp"

namespace strokegen {

Tensor& ParamStore::create(const std::string& name, Tensor init) {
    if (has(name)) fail("state", "parameter '" + name + "' already exists");
    ParamEntry e;
    e.grad = Tensor::zeros(init.shape);
    e.adam_m = Tensor::zeros(init.shape);
    e.adam_v = Tensor::zeros(init.shape);
    e.value = std::move(init);
    auto [it, ok] = entries_.emplace(name, std::move(e));
    (void)ok;
    return it->second.value;
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }

const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }

Tensor& ParamStore::grad(const std::string& name) {
    ParamEntry& e = entry(name);
    e.grad_set = true;
    return e.grad;
}

void ParamStore::accumulate_grad(const std::string& name, const Tensor& g, double scale) {
    ParamEntry& e = entry(name);
    require_same_shape(e.grad, g, "accumulate_grad '" + name + "'");
    add_scaled(e.grad, g, scale);
    e.grad_set = true;
}

void ParamStore::zero_grads() {
    for (auto& [name, e] : entries_) {
        e.grad.zero();
        e.grad_set = false;
    }
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
    for (const auto& [name, e] : entries_)
        if (!e.grad_set) fail("state", "adam_step: missing gradient for parameter '" + name + "'");
    const std::uint64_t t = step_count_ + 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& [name, e] : entries_) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double g = e.grad.data[i];
            double& m = e.adam_m.data[i];
            double& v = e.adam_v.data[i];
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            e.value.data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
        e.grad.zero();
        e.grad_set = false;
    }
    ++step_count_;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
}

ParamEntry& ParamStore::entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) fail("state", "unknown parameter '" + name + "'");
    return it->second;
}

const ParamEntry& ParamStore::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) fail("state", "unknown parameter '" + name + "'");
    return it->second;
}

}  // namespace strokegen
