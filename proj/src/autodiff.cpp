#include "icd/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "icd/kernels.hpp"

namespace icd::ad {

namespace {

[[noreturn]] void shape_error(const char* opname, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(opname) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

bool is_scalar(const Tensor& t) { return t.numel() == 1; }

}  // namespace

Tape::Node& Tape::at(ValueId id) { return nodes_[static_cast<size_t>(id)]; }
const Tape::Node& Tape::at(ValueId id) const { return nodes_[static_cast<size_t>(id)]; }

ValueId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<ValueId>(nodes_.size() - 1);
}

const Tensor& Tape::value(ValueId id) const { return at(id).value; }
const Tensor& Tape::grad(ValueId id) const { return at(id).grad; }

ValueId Tape::constant(Tensor v) {
    Node n;
    n.op = Op::constant;
    n.value = std::move(v);
    return push(std::move(n));
}

ValueId Tape::param(const Tensor* value, Tensor* grad) {
    if (!value || !grad) throw std::invalid_argument("param: null binding");
    if (value->shape != grad->shape) shape_error("param", *value, *grad);
    Node n;
    n.op = Op::param;
    n.value = *value;
    n.bound_value = value;
    n.bound_grad = grad;
    return push(std::move(n));
}

ValueId Tape::matmul(ValueId a, ValueId b) {
    const Tensor& va = at(a).value;
    const Tensor& vb = at(b).value;
    if (va.rank() != 2 || vb.rank() != 2 || va.cols() != vb.rows()) shape_error("matmul", va, vb);
    Node n;
    n.op = Op::matmul;
    n.parents = {a, b};
    n.value = Tensor({va.rows(), vb.cols()});
    kern::matmul_nn(va.data.data(), vb.data.data(), n.value.data.data(), va.rows(), va.cols(), vb.cols());
    return push(std::move(n));
}

void Tape::check_same_or_scalar(const char* opname, ValueId a, ValueId b) const {
    const Tensor& va = at(a).value;
    const Tensor& vb = at(b).value;
    if (!va.same_shape(vb) && !is_scalar(va) && !is_scalar(vb)) shape_error(opname, va, vb);
}

ValueId Tape::add(ValueId a, ValueId b) {
    check_same_or_scalar("add", a, b);
    const Tensor& va = at(a).value;
    const Tensor& vb = at(b).value;
    Node n;
    n.op = Op::add;
    n.parents = {a, b};
    if (is_scalar(vb) && !is_scalar(va)) {
        n.value = va;
        const double s = vb.data[0];
        for (double& x : n.value.data) x += s;
    } else if (is_scalar(va) && !is_scalar(vb)) {
        n.value = vb;
        const double s = va.data[0];
        for (double& x : n.value.data) x += s;
    } else {
        n.value = va;
        for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += vb.data[i];
    }
    return push(std::move(n));
}

ValueId Tape::sub(ValueId a, ValueId b) {
    check_same_or_scalar("sub", a, b);
    const Tensor& va = at(a).value;
    const Tensor& vb = at(b).value;
    Node n;
    n.op = Op::sub;
    n.parents = {a, b};
    if (is_scalar(vb) && !is_scalar(va)) {
        n.value = va;
        const double s = vb.data[0];
        for (double& x : n.value.data) x -= s;
    } else if (is_scalar(va) && !is_scalar(vb)) {
        n.value = vb;
        const double s = va.data[0];
        for (double& x : n.value.data) x = s - x;
    } else {
        n.value = va;
        for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= vb.data[i];
    }
    return push(std::move(n));
}

ValueId Tape::mul(ValueId a, ValueId b) {
    check_same_or_scalar("mul", a, b);
    const Tensor& va = at(a).value;
    const Tensor& vb = at(b).value;
    Node n;
    n.op = Op::mul;
    n.parents = {a, b};
    if (is_scalar(vb) && !is_scalar(va)) {
        n.value = va;
        const double s = vb.data[0];
        for (double& x : n.value.data) x *= s;
    } else if (is_scalar(va) && !is_scalar(vb)) {
        n.value = vb;
        const double s = va.data[0];
        for (double& x : n.value.data) x *= s;
    } else {
        n.value = Tensor(va.shape);
        kern::vmul(va.data.data(), vb.data.data(), n.value.data.data(), va.numel());
    }
    return push(std::move(n));
}

ValueId Tape::scale(ValueId a, double s) {
    Node n;
    n.op = Op::scale;
    n.parents = {a};
    n.factor = s;
    n.value = at(a).value;
    for (double& x : n.value.data) x *= s;
    return push(std::move(n));
}

ValueId Tape::tanh_act(ValueId a) {
    Node n;
    n.op = Op::tanh_act;
    n.parents = {a};
    const Tensor& va = at(a).value;
    n.value = Tensor(va.shape);
    kern::vtanh(va.data.data(), n.value.data.data(), va.numel());
    return push(std::move(n));
}

ValueId Tape::square(ValueId a) {
    Node n;
    n.op = Op::square;
    n.parents = {a};
    const Tensor& va = at(a).value;
    n.value = Tensor(va.shape);
    kern::vmul(va.data.data(), va.data.data(), n.value.data.data(), va.numel());
    return push(std::move(n));
}

ValueId Tape::add_bias(ValueId a, ValueId bias) {
    const Tensor& va = at(a).value;
    const Tensor& vb = at(bias).value;
    if (va.rank() != 2 || vb.numel() != va.cols()) shape_error("add_bias", va, vb);
    Node n;
    n.op = Op::add_bias;
    n.parents = {a, bias};
    n.value = va;
    const int64_t rows = va.rows(), cols = va.cols();
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) n.value.data[static_cast<size_t>(i * cols + j)] += vb.data[static_cast<size_t>(j)];
    return push(std::move(n));
}

ValueId Tape::concat_cols(const std::vector<ValueId>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    const int64_t rows = at(parts[0]).value.rows();
    int64_t total = 0;
    for (ValueId p : parts) {
        const Tensor& v = at(p).value;
        if (v.rank() != 2 || v.rows() != rows) shape_error("concat_cols", at(parts[0]).value, v);
        total += v.cols();
    }
    Node n;
    n.op = Op::concat_cols;
    n.parents = parts;
    n.value = Tensor({rows, total});
    for (ValueId p : parts) n.idx.push_back(at(p).value.cols());
    int64_t off = 0;
    for (size_t pi = 0; pi < parts.size(); ++pi) {
        const Tensor& v = at(parts[pi]).value;
        const int64_t w = v.cols();
        for (int64_t i = 0; i < rows; ++i)
            for (int64_t j = 0; j < w; ++j) n.value.at(i, off + j) = v.at(i, j);
        off += w;
    }
    return push(std::move(n));
}

ValueId Tape::gather_rows(ValueId table, std::vector<int64_t> idx) {
    const Tensor& vt = at(table).value;
    if (vt.rank() != 2) throw std::invalid_argument("gather_rows: table must be rank 2, got " + vt.shape_str());
    for (int64_t i : idx)
        if (i < 0 || i >= vt.rows())
            throw std::out_of_range("gather_rows: index " + std::to_string(i) + " outside table " + vt.shape_str());
    Node n;
    n.op = Op::gather_rows;
    n.parents = {table};
    n.value = Tensor({static_cast<int64_t>(idx.size()), vt.cols()});
    const int64_t w = vt.cols();
    for (size_t i = 0; i < idx.size(); ++i)
        for (int64_t j = 0; j < w; ++j) n.value.at(static_cast<int64_t>(i), j) = vt.at(idx[i], j);
    n.idx = std::move(idx);
    return push(std::move(n));
}

ValueId Tape::row_scale(ValueId a, Tensor coeffs) {
    const Tensor& va = at(a).value;
    if (va.rank() != 2 || coeffs.numel() != va.rows()) shape_error("row_scale", va, coeffs);
    Node n;
    n.op = Op::row_scale;
    n.parents = {a};
    n.value = va;
    const int64_t rows = va.rows(), cols = va.cols();
    for (int64_t i = 0; i < rows; ++i) {
        const double c = coeffs.data[static_cast<size_t>(i)];
        for (int64_t j = 0; j < cols; ++j) n.value.data[static_cast<size_t>(i * cols + j)] *= c;
    }
    n.coeffs = std::move(coeffs);
    return push(std::move(n));
}

ValueId Tape::sum_all(ValueId a) {
    Node n;
    n.op = Op::sum_all;
    n.parents = {a};
    n.value = Tensor({1});
    n.value.data[0] = kern::reduce_sum(at(a).value.data.data(), at(a).value.numel());
    return push(std::move(n));
}

ValueId Tape::mean_all(ValueId a) {
    const int64_t cnt = at(a).value.numel();
    if (cnt == 0) throw std::invalid_argument("mean_all: empty tensor");
    Node n;
    n.op = Op::mean_all;
    n.parents = {a};
    n.factor = 1.0 / static_cast<double>(cnt);
    n.value = Tensor({1});
    n.value.data[0] = kern::reduce_sum(at(a).value.data.data(), cnt) * n.factor;
    return push(std::move(n));
}

void Tape::backward(ValueId loss) {
    if (backward_done_) throw std::logic_error("backward: tape already swept; rebuild the graph");
    if (at(loss).value.numel() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " + at(loss).value.shape_str());
    backward_done_ = true;

    for (Node& n : nodes_) n.grad = Tensor(n.value.shape);
    at(loss).grad.data[0] = 1.0;

    for (int64_t i = static_cast<int64_t>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[static_cast<size_t>(i)];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::constant:
            case Op::param:
                break;
            case Op::matmul: {
                Node& pa = at(n.parents[0]);
                Node& pb = at(n.parents[1]);
                const int64_t m = pa.value.rows(), k = pa.value.cols(), c = pb.value.cols();
                Tensor ga({m, k}), gb({k, c});
                kern::matmul_nt(g.data.data(), pb.value.data.data(), ga.data.data(), m, c, k);
                kern::matmul_tn(pa.value.data.data(), g.data.data(), gb.data.data(), k, m, c);
                for (size_t j = 0; j < ga.data.size(); ++j) pa.grad.data[j] += ga.data[j];
                for (size_t j = 0; j < gb.data.size(); ++j) pb.grad.data[j] += gb.data[j];
                break;
            }
            case Op::add:
            case Op::sub: {
                const double sign = n.op == Op::sub ? -1.0 : 1.0;
                Node& pa = at(n.parents[0]);
                Node& pb = at(n.parents[1]);
                if (is_scalar(pa.value) && !is_scalar(pb.value)) {
                    pa.grad.data[0] += kern::reduce_sum(g.data.data(), g.numel());
                    for (size_t j = 0; j < g.data.size(); ++j) pb.grad.data[j] += sign * g.data[j];
                } else if (is_scalar(pb.value) && !is_scalar(pa.value)) {
                    for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += g.data[j];
                    pb.grad.data[0] += sign * kern::reduce_sum(g.data.data(), g.numel());
                } else {
                    for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += g.data[j];
                    for (size_t j = 0; j < g.data.size(); ++j) pb.grad.data[j] += sign * g.data[j];
                }
                break;
            }
            case Op::mul: {
                Node& pa = at(n.parents[0]);
                Node& pb = at(n.parents[1]);
                if (is_scalar(pa.value) && !is_scalar(pb.value)) {
                    double s = 0.0;
                    for (size_t j = 0; j < g.data.size(); ++j) s += g.data[j] * pb.value.data[j];
                    pa.grad.data[0] += s;
                    const double f = pa.value.data[0];
                    for (size_t j = 0; j < g.data.size(); ++j) pb.grad.data[j] += f * g.data[j];
                } else if (is_scalar(pb.value) && !is_scalar(pa.value)) {
                    const double f = pb.value.data[0];
                    for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += f * g.data[j];
                    double s = 0.0;
                    for (size_t j = 0; j < g.data.size(); ++j) s += g.data[j] * pa.value.data[j];
                    pb.grad.data[0] += s;
                } else {
                    for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += g.data[j] * pb.value.data[j];
                    for (size_t j = 0; j < g.data.size(); ++j) pb.grad.data[j] += g.data[j] * pa.value.data[j];
                }
                break;
            }
            case Op::scale: {
                Node& pa = at(n.parents[0]);
                for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += n.factor * g.data[j];
                break;
            }
            case Op::tanh_act: {
                Node& pa = at(n.parents[0]);
                for (size_t j = 0; j < g.data.size(); ++j) {
                    const double y = n.value.data[j];
                    pa.grad.data[j] += g.data[j] * (1.0 - y * y);
                }
                break;
            }
            case Op::square: {
                Node& pa = at(n.parents[0]);
                for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += 2.0 * g.data[j] * pa.value.data[j];
                break;
            }
            case Op::add_bias: {
                Node& pa = at(n.parents[0]);
                Node& pb = at(n.parents[1]);
                const int64_t rows = n.value.rows(), cols = n.value.cols();
                for (size_t j = 0; j < g.data.size(); ++j) pa.grad.data[j] += g.data[j];
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c2 = 0; c2 < cols; ++c2)
                        pb.grad.data[static_cast<size_t>(c2)] += g.data[static_cast<size_t>(r * cols + c2)];
                break;
            }
            case Op::concat_cols: {
                const int64_t rows = n.value.rows(), cols = n.value.cols();
                int64_t off = 0;
                for (size_t pi = 0; pi < n.parents.size(); ++pi) {
                    Node& p = at(n.parents[pi]);
                    const int64_t w = n.idx[pi];
                    for (int64_t r = 0; r < rows; ++r)
                        for (int64_t j = 0; j < w; ++j)
                            p.grad.data[static_cast<size_t>(r * w + j)] += g.data[static_cast<size_t>(r * cols + off + j)];
                    off += w;
                }
                break;
            }
            case Op::gather_rows: {
                Node& pt = at(n.parents[0]);
                const int64_t w = pt.value.cols();
                for (size_t r = 0; r < n.idx.size(); ++r)
                    for (int64_t j = 0; j < w; ++j)
                        pt.grad.data[static_cast<size_t>(n.idx[r] * w + j)] += g.data[r * static_cast<size_t>(w) + static_cast<size_t>(j)];
                break;
            }
            case Op::row_scale: {
                Node& pa = at(n.parents[0]);
                const int64_t rows = n.value.rows(), cols = n.value.cols();
                for (int64_t r = 0; r < rows; ++r) {
                    const double c = n.coeffs.data[static_cast<size_t>(r)];
                    for (int64_t j = 0; j < cols; ++j)
                        pa.grad.data[static_cast<size_t>(r * cols + j)] += c * g.data[static_cast<size_t>(r * cols + j)];
                }
                break;
            }
            case Op::sum_all: {
                Node& pa = at(n.parents[0]);
                const double gv = g.data[0];
                for (double& x : pa.grad.data) x += gv;
                break;
            }
            case Op::mean_all: {
                Node& pa = at(n.parents[0]);
                const double gv = g.data[0] * n.factor;
                for (double& x : pa.grad.data) x += gv;
                break;
            }
        }
    }

    // flush bound parameter gradients
    for (Node& n : nodes_) {
        if (n.op == Op::param && n.bound_grad)
            for (size_t j = 0; j < n.grad.data.size(); ++j) n.bound_grad->data[j] += n.grad.data[j];
    }
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& st, double lr,
               double beta1, double beta2, double eps) {
    if (!param.same_shape(grad))
        throw std::invalid_argument("adam_step: shape mismatch " + param.shape_str() + " vs " + grad.shape_str());
    if (st.m.numel() == 0) {
        st.m = Tensor(param.shape);
        st.v = Tensor(param.shape);
    }
    st.step += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
    for (size_t i = 0; i < param.data.size(); ++i) {
        const double g = grad.data[i];
        st.m.data[i] = beta1 * st.m.data[i] + (1.0 - beta1) * g;
        st.v.data[i] = beta2 * st.v.data[i] + (1.0 - beta2) * g * g;
        const double mhat = st.m.data[i] / c1;
        const double vhat = st.v.data[i] / c2;
        param.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace icd::ad
