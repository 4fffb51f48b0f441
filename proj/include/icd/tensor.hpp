// Dense row-major tensor of doubles, rank 1 or 2 in practice.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icd {

struct Tensor {
    std::vector<int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s);
    Tensor(std::vector<int64_t> s, std::vector<double> d);

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int64_t> s, double v);
    // rank-2 convenience from nested initializer data
    static Tensor from_rows(const std::vector<std::vector<double>>& rows);

    int64_t numel() const;
    int64_t rank() const { return static_cast<int64_t>(shape.size()); }
    int64_t rows() const;
    int64_t cols() const;

    double& at(int64_t i) { return data[static_cast<size_t>(i)]; }
    double at(int64_t i) const { return data[static_cast<size_t>(i)]; }
    double& at(int64_t r, int64_t c);
    double at(int64_t r, int64_t c) const;

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
    std::string shape_str() const;
};

// exact element-wise equality (bitwise on values)
bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace icd
