#include "icd/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace icd {

static int64_t shape_numel(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d < 0) throw std::invalid_argument("tensor: negative dimension");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
}

Tensor::Tensor(std::vector<int64_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != static_cast<int64_t>(data.size()))
        throw std::invalid_argument("tensor: data size does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int64_t> s, double v) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = v;
    return t;
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Tensor({0, 0});
    const int64_t r = static_cast<int64_t>(rows.size());
    const int64_t c = static_cast<int64_t>(rows[0].size());
    Tensor t({r, c});
    for (int64_t i = 0; i < r; ++i) {
        if (static_cast<int64_t>(rows[static_cast<size_t>(i)].size()) != c)
            throw std::invalid_argument("tensor: ragged rows");
        for (int64_t j = 0; j < c; ++j) t.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    return t;
}

int64_t Tensor::numel() const { return static_cast<int64_t>(data.size()); }

int64_t Tensor::rows() const {
    if (rank() != 2) throw std::invalid_argument("tensor: rows() on rank " + std::to_string(rank()));
    return shape[0];
}

int64_t Tensor::cols() const {
    if (rank() != 2) throw std::invalid_argument("tensor: cols() on rank " + std::to_string(rank()));
    return shape[1];
}

double& Tensor::at(int64_t r, int64_t c) {
    return data[static_cast<size_t>(r * shape[1] + c)];
}

double Tensor::at(int64_t r, int64_t c) const {
    return data[static_cast<size_t>(r * shape[1] + c)];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ")";
    return os.str();
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    for (size_t i = 0; i < a.data.size(); ++i) {
        uint64_t ba, bb;
        std::memcpy(&ba, &a.data[i], sizeof ba);
        std::memcpy(&bb, &b.data[i], sizeof bb);
        if (ba != bb) return false;
    }
    return true;
}

}  // namespace icd
