#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace strokegen {

// Dense row-major double tensor with dynamic rank. The project uses rank 1
// (vectors), rank 2 ([batch x dim] matrices) and rank 4 ([N,C,H,W] images).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);
    Tensor(std::vector<std::size_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<std::size_t> s, double v);
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static std::size_t count(const std::vector<std::size_t>& s);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    // Rank-2 accessors; throw on other ranks.
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c);
    double at(std::size_t r, std::size_t c) const;

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    void fill(double v);
    void zero() { fill(0.0); }
};

std::string shape_string(const std::vector<std::size_t>& shape);
void require_same_shape(const Tensor& a, const Tensor& b, const std::string& where);
void require_rank(const Tensor& t, std::size_t rank, const std::string& where);

// c = a * b for rank-2 tensors; throws a "shape" error naming both shapes on
// inner-dimension mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// out += scale * op(a) * op(b), where op is optional transposition. The
// workhorse of the hand-written backward passes.
void add_matmul(Tensor& out, const Tensor& a, bool transpose_a, const Tensor& b,
                bool transpose_b, double scale = 1.0);

// Elementwise helpers.
void add_scaled(Tensor& dst, const Tensor& src, double scale = 1.0);
Tensor hadamard(const Tensor& a, const Tensor& b);

}  // namespace strokegen
