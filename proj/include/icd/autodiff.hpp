// Tape-based reverse-mode autodiff over Tensor. A Tape owns one computation
// graph; parents are always created before children, so the reverse sweep is
// a plain backwards pass over the node list. Single-threaded per tape; the
// kernels inside may be parallel.
#pragma once

#include <cstdint>
#include <vector>

#include "icd/tensor.hpp"

namespace icd::ad {

using ValueId = int32_t;

class Tape {
  public:
    // leaf holding a fixed value
    ValueId constant(Tensor v);
    // leaf bound to external parameter storage; backward accumulates into *grad
    ValueId param(const Tensor* value, Tensor* grad);

    ValueId matmul(ValueId a, ValueId b);
    // add/sub/mul accept exact-shape operands or a scalar (1-element) operand
    ValueId add(ValueId a, ValueId b);
    ValueId sub(ValueId a, ValueId b);
    ValueId mul(ValueId a, ValueId b);
    ValueId scale(ValueId a, double s);
    ValueId tanh_act(ValueId a);
    ValueId square(ValueId a);
    ValueId add_bias(ValueId a, ValueId bias);               // [BxN] + [N] per row
    ValueId concat_cols(const std::vector<ValueId>& parts);  // rank-2, equal row counts
    ValueId gather_rows(ValueId table, std::vector<int64_t> idx);
    ValueId row_scale(ValueId a, Tensor coeffs);             // out[i,:] = coeffs[i] * a[i,:]
    ValueId sum_all(ValueId a);                              // scalar [1]
    ValueId mean_all(ValueId a);                             // scalar [1]

    const Tensor& value(ValueId id) const;
    const Tensor& grad(ValueId id) const;

    // loss must be a single-element tensor; flushes into bound param grads.
    // One backward per tape: rebuild the graph for a fresh pass.
    void backward(ValueId loss);

    int64_t size() const { return static_cast<int64_t>(nodes_.size()); }

  private:
    enum class Op : uint8_t {
        constant, param, matmul, add, sub, mul, scale, tanh_act, square,
        add_bias, concat_cols, gather_rows, row_scale, sum_all, mean_all
    };

    struct Node {
        Op op;
        Tensor value;
        Tensor grad;
        std::vector<ValueId> parents;
        // op payloads
        double factor = 0.0;
        std::vector<int64_t> idx;       // gather indices / concat split widths
        Tensor coeffs;                  // row_scale
        const Tensor* bound_value = nullptr;
        Tensor* bound_grad = nullptr;
    };

    ValueId push(Node n);
    Node& at(ValueId id);
    const Node& at(ValueId id) const;
    void check_same_or_scalar(const char* opname, ValueId a, ValueId b) const;

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Adam with bias correction; moments live with the caller
struct AdamState {
    Tensor m, v;
    int64_t step = 0;
};

void adam_step(Tensor& param, const Tensor& grad, AdamState& st, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace icd::ad
