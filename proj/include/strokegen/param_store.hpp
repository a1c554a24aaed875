#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "strokegen/tensor.hpp"

namespace strokegen {

struct ParamEntry {
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
    bool grad_set = false;
};

// Owns every learnable tensor of a model together with its gradient and Adam
// moments. Single-writer: the training loop mutates it exclusively.
class ParamStore {
public:
    Tensor& create(const std::string& name, Tensor init);
    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;

    // Returns the gradient tensor and marks it populated.
    Tensor& grad(const std::string& name);
    void accumulate_grad(const std::string& name, const Tensor& g, double scale = 1.0);

    void zero_grads();

    // Standard Adam with bias correction. Gradients must be populated for
    // every entry; they are zeroed afterwards and step_count increments by 1.
    void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                   double eps = 1e-8);

    std::uint64_t step_count() const { return step_count_; }
    void set_step_count(std::uint64_t n) { step_count_ = n; }

    std::vector<std::string> names() const;
    ParamEntry& entry(const std::string& name);
    const ParamEntry& entry(const std::string& name) const;

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, ParamEntry> entries_;  // ordered: deterministic iteration
    std::uint64_t step_count_ = 0;
};

}  // namespace strokegen
