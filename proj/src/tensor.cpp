#include "strokegen/tensor.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "strokegen/error.hpp"

namespace strokegen {

namespace {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapConst = Eigen::Map<const EigenRowMajor>;
using Map = Eigen::Map<EigenRowMajor>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s)
    : shape(std::move(s)), data(count(shape), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (count(shape) != data.size())
        fail("shape", "tensor data length " + std::to_string(data.size()) +
                          " does not match shape " + shape_string(shape));
}

Tensor Tensor::full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    t.fill(v);
    return t;
}

std::size_t Tensor::count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
}

std::size_t Tensor::rows() const {
    if (rank() != 2) fail("shape", "rows() on tensor of shape " + shape_string(shape));
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) fail("shape", "cols() on tensor of shape " + shape_string(shape));
    return shape[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }

double Tensor::at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data) x = v;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const std::string& where) {
    if (!a.same_shape(b))
        fail("shape", where + ": shapes " + shape_string(a.shape) + " and " +
                          shape_string(b.shape) + " differ");
}

void require_rank(const Tensor& t, std::size_t rank, const std::string& where) {
    if (t.rank() != rank)
        fail("shape", where + ": expected rank " + std::to_string(rank) +
                          ", got shape " + shape_string(t.shape));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul lhs");
    require_rank(b, 2, "matmul rhs");
    if (a.cols() != b.rows())
        fail("shape", "matmul: inner dimensions disagree, " + shape_string(a.shape) +
                          " x " + shape_string(b.shape));
    Tensor c({a.rows(), b.cols()});
    MapConst ma(a.data.data(), static_cast<Eigen::Index>(a.rows()),
                static_cast<Eigen::Index>(a.cols()));
    MapConst mb(b.data.data(), static_cast<Eigen::Index>(b.rows()),
                static_cast<Eigen::Index>(b.cols()));
    Map mc(c.data.data(), static_cast<Eigen::Index>(c.rows()),
           static_cast<Eigen::Index>(c.cols()));
    mc.noalias() = ma * mb;
    return c;
}

void add_matmul(Tensor& out, const Tensor& a, bool transpose_a, const Tensor& b,
                bool transpose_b, double scale) {
    require_rank(a, 2, "add_matmul lhs");
    require_rank(b, 2, "add_matmul rhs");
    require_rank(out, 2, "add_matmul out");
    const std::size_t am = transpose_a ? a.cols() : a.rows();
    const std::size_t ak = transpose_a ? a.rows() : a.cols();
    const std::size_t bk = transpose_b ? b.cols() : b.rows();
    const std::size_t bn = transpose_b ? b.rows() : b.cols();
    if (ak != bk || out.rows() != am || out.cols() != bn)
        fail("shape", "add_matmul: incompatible shapes " + shape_string(a.shape) +
                          (transpose_a ? "^T" : "") + " x " + shape_string(b.shape) +
                          (transpose_b ? "^T" : "") + " -> " + shape_string(out.shape));
    MapConst ma(a.data.data(), static_cast<Eigen::Index>(a.rows()),
                static_cast<Eigen::Index>(a.cols()));
    MapConst mb(b.data.data(), static_cast<Eigen::Index>(b.rows()),
                static_cast<Eigen::Index>(b.cols()));
    Map mo(out.data.data(), static_cast<Eigen::Index>(out.rows()),
           static_cast<Eigen::Index>(out.cols()));
    if (!transpose_a && !transpose_b)
        mo.noalias() += scale * (ma * mb);
    else if (transpose_a && !transpose_b)
        mo.noalias() += scale * (ma.transpose() * mb);
    else if (!transpose_a && transpose_b)
        mo.noalias() += scale * (ma * mb.transpose());
    else
        mo.noalias() += scale * (ma.transpose() * mb.transpose());
}

void add_scaled(Tensor& dst, const Tensor& src, double scale) {
    require_same_shape(dst, src, "add_scaled");
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += scale * src.data[i];
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor c(a.shape);
    for (std::size_t i = 0; i < a.size(); ++i) c.data[i] = a.data[i] * b.data[i];
    return c;
}

}  // namespace strokegen
