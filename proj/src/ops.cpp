#include "peg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "peg/kernels.hpp"

namespace peg::ad {

namespace {

TensorPtr out_like(const std::vector<int>& shape, bool requires_grad) {
    return zeros(std::vector<int>(shape), requires_grad);
}

bool needs_grad(const TensorPtr& a) { return a->requires_grad; }
bool needs_grad(const TensorPtr& a, const TensorPtr& b) {
    return a->requires_grad || b->requires_grad;
}

void check_broadcast(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape == b->shape || a->size() == 1 || b->size() == 1) return;
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                                " vs " + shape_str(b->shape));
}

// index helpers for scalar-with-tensor broadcasting
inline int bidx(const TensorPtr& t, int i) { return t->size() == 1 ? 0 : i; }

template <typename FwdFn, typename BwdFn>
TensorPtr unary_op(Tape& tape, const TensorPtr& a, FwdFn fwd, BwdFn dfd) {
    auto out = out_like(a->shape, needs_grad(a));
    for (int i = 0; i < a->size(); ++i) out->value[i] = fwd(a->value[i]);
    if (out->requires_grad) {
        tape.record([a, out, dfd]() {
            for (int i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[i] * dfd(a->value[i], out->value[i]);
        });
    }
    return out;
}

}  // namespace

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_broadcast(a, b, "add");
    const auto& shape = a->size() >= b->size() ? a->shape : b->shape;
    auto out = out_like(shape, needs_grad(a, b));
    for (int i = 0; i < out->size(); ++i)
        out->value[i] = a->value[bidx(a, i)] + b->value[bidx(b, i)];
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (int i = 0; i < out->size(); ++i) {
                if (a->requires_grad) a->grad[bidx(a, i)] += out->grad[i];
                if (b->requires_grad) b->grad[bidx(b, i)] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr sub(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_broadcast(a, b, "sub");
    const auto& shape = a->size() >= b->size() ? a->shape : b->shape;
    auto out = out_like(shape, needs_grad(a, b));
    for (int i = 0; i < out->size(); ++i)
        out->value[i] = a->value[bidx(a, i)] - b->value[bidx(b, i)];
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (int i = 0; i < out->size(); ++i) {
                if (a->requires_grad) a->grad[bidx(a, i)] += out->grad[i];
                if (b->requires_grad) b->grad[bidx(b, i)] -= out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_broadcast(a, b, "mul");
    const auto& shape = a->size() >= b->size() ? a->shape : b->shape;
    auto out = out_like(shape, needs_grad(a, b));
    for (int i = 0; i < out->size(); ++i)
        out->value[i] = a->value[bidx(a, i)] * b->value[bidx(b, i)];
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (int i = 0; i < out->size(); ++i) {
                if (a->requires_grad) a->grad[bidx(a, i)] += out->grad[i] * b->value[bidx(b, i)];
                if (b->requires_grad) b->grad[bidx(b, i)] += out->grad[i] * a->value[bidx(a, i)];
            }
        });
    }
    return out;
}

TensorPtr div(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    check_broadcast(a, b, "div");
    const auto& shape = a->size() >= b->size() ? a->shape : b->shape;
    auto out = out_like(shape, needs_grad(a, b));
    for (int i = 0; i < out->size(); ++i)
        out->value[i] = a->value[bidx(a, i)] / b->value[bidx(b, i)];
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            for (int i = 0; i < out->size(); ++i) {
                const double bv = b->value[bidx(b, i)];
                if (a->requires_grad) a->grad[bidx(a, i)] += out->grad[i] / bv;
                if (b->requires_grad)
                    b->grad[bidx(b, i)] -= out->grad[i] * a->value[bidx(a, i)] / (bv * bv);
            }
        });
    }
    return out;
}

TensorPtr scale(Tape& tape, const TensorPtr& a, double c) {
    return unary_op(
        tape, a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

TensorPtr add_const(Tape& tape, const TensorPtr& a, double c) {
    return unary_op(
        tape, a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

TensorPtr neg(Tape& tape, const TensorPtr& a) { return scale(tape, a, -1.0); }

TensorPtr sigmoid(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a,
        [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                        : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

TensorPtr tanh_op(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

TensorPtr exp_op(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

TensorPtr log_op(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

TensorPtr softplus(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a,
        [](double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); },
        [](double x, double) {
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        });
}

TensorPtr leaky_relu(Tape& tape, const TensorPtr& a, double negative_slope) {
    return unary_op(
        tape, a, [negative_slope](double x) { return x > 0.0 ? x : negative_slope * x; },
        [negative_slope](double x, double) { return x > 0.0 ? 1.0 : negative_slope; });
}

TensorPtr reciprocal(Tape& tape, const TensorPtr& a) {
    return unary_op(
        tape, a, [](double x) { return 1.0 / x; },
        [](double, double y) { return -y * y; });
}

TensorPtr softmax(Tape& tape, const TensorPtr& a, int axis) {
    if (a->shape.size() > 2)
        throw std::invalid_argument("softmax: only 1-D and 2-D tensors supported");
    const int ndim = static_cast<int>(a->shape.size());
    if (axis < 0) axis += ndim;
    if (axis < 0 || axis >= ndim)
        throw std::invalid_argument("softmax: axis out of range for shape " +
                                    shape_str(a->shape));

    // view the tensor as groups x span where softmax runs within each group
    int groups, span, gstride, sstride;
    if (ndim == 1) {
        groups = 1, span = a->shape[0], gstride = 0, sstride = 1;
    } else if (axis == 1) {
        groups = a->shape[0], span = a->shape[1], gstride = a->shape[1], sstride = 1;
    } else {
        groups = a->shape[1], span = a->shape[0], gstride = 1, sstride = a->shape[1];
    }

    auto out = out_like(a->shape, needs_grad(a));
    for (int g = 0; g < groups; ++g) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < span; ++s) mx = std::max(mx, a->value[g * gstride + s * sstride]);
        double z = 0.0;
        for (int s = 0; s < span; ++s) {
            const int i = g * gstride + s * sstride;
            out->value[i] = std::exp(a->value[i] - mx);
            z += out->value[i];
        }
        for (int s = 0; s < span; ++s) out->value[g * gstride + s * sstride] /= z;
    }
    if (out->requires_grad) {
        tape.record([a, out, groups, span, gstride, sstride]() {
            for (int g = 0; g < groups; ++g) {
                double dotv = 0.0;
                for (int s = 0; s < span; ++s) {
                    const int i = g * gstride + s * sstride;
                    dotv += out->grad[i] * out->value[i];
                }
                for (int s = 0; s < span; ++s) {
                    const int i = g * gstride + s * sstride;
                    a->grad[i] += out->value[i] * (out->grad[i] - dotv);
                }
            }
        });
    }
    return out;
}

TensorPtr matmul(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2)
        throw std::invalid_argument("matmul: expected 2-D operands, got " + shape_str(a->shape) +
                                    " and " + shape_str(b->shape));
    const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
    if (b->shape[0] != k)
        throw std::invalid_argument("matmul: inner dimensions disagree, " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
    auto out = out_like({m, n}, needs_grad(a, b));
    kernels::gemm(false, false, m, n, k, a->value.data(), b->value.data(), out->value.data(),
                  false);
    if (out->requires_grad) {
        tape.record([a, b, out, m, n, k]() {
            if (a->requires_grad)
                kernels::gemm(false, true, m, k, n, out->grad.data(), b->value.data(),
                              a->grad.data(), true);
            if (b->requires_grad)
                kernels::gemm(true, false, k, n, m, a->value.data(), out->grad.data(),
                              b->grad.data(), true);
        });
    }
    return out;
}

TensorPtr matvec(Tape& tape, const TensorPtr& w, const TensorPtr& x) {
    if (w->shape.size() != 2 || x->shape.size() != 1)
        throw std::invalid_argument("matvec: expected [m,k] and [k], got " + shape_str(w->shape) +
                                    " and " + shape_str(x->shape));
    const int m = w->shape[0], k = w->shape[1];
    if (x->shape[0] != k)
        throw std::invalid_argument("matvec: inner dimensions disagree, " + shape_str(w->shape) +
                                    " vs " + shape_str(x->shape));
    auto out = out_like({m}, needs_grad(w, x));
    kernels::gemm(false, false, m, 1, k, w->value.data(), x->value.data(), out->value.data(),
                  false);
    if (out->requires_grad) {
        tape.record([w, x, out, m, k]() {
            if (w->requires_grad)
                kernels::gemm(false, true, m, k, 1, out->grad.data(), x->value.data(),
                              w->grad.data(), true);
            if (x->requires_grad)
                kernels::gemm(true, false, k, 1, m, w->value.data(), out->grad.data(),
                              x->grad.data(), true);
        });
    }
    return out;
}

TensorPtr dot(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
    if (a->size() != b->size())
        throw std::invalid_argument("dot: length mismatch " + shape_str(a->shape) + " vs " +
                                    shape_str(b->shape));
    auto out = out_like({1}, needs_grad(a, b));
    double acc = 0.0;
    for (int i = 0; i < a->size(); ++i) acc += a->value[i] * b->value[i];
    out->value[0] = acc;
    if (out->requires_grad) {
        tape.record([a, b, out]() {
            const double g = out->grad[0];
            for (int i = 0; i < a->size(); ++i) {
                if (a->requires_grad) a->grad[i] += g * b->value[i];
                if (b->requires_grad) b->grad[i] += g * a->value[i];
            }
        });
    }
    return out;
}

TensorPtr sum(Tape& tape, const TensorPtr& a) {
    auto out = out_like({1}, needs_grad(a));
    double acc = 0.0;
    for (double v : a->value) acc += v;
    out->value[0] = acc;
    if (out->requires_grad) {
        tape.record([a, out]() {
            for (int i = 0; i < a->size(); ++i) a->grad[i] += out->grad[0];
        });
    }
    return out;
}

TensorPtr mean(Tape& tape, const TensorPtr& a) {
    auto s = sum(tape, a);
    return scale(tape, s, 1.0 / a->size());
}

TensorPtr concat(Tape& tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no parts");
    int total = 0;
    bool rg = false;
    for (const auto& p : parts) {
        total += p->size();
        rg = rg || p->requires_grad;
    }
    auto out = out_like({total}, rg);
    int off = 0;
    for (const auto& p : parts) {
        std::copy(p->value.begin(), p->value.end(), out->value.begin() + off);
        off += p->size();
    }
    if (rg) {
        tape.record([parts, out]() {
            int off = 0;
            for (const auto& p : parts) {
                if (p->requires_grad)
                    for (int i = 0; i < p->size(); ++i) p->grad[i] += out->grad[off + i];
                off += p->size();
            }
        });
    }
    return out;
}

TensorPtr slice(Tape& tape, const TensorPtr& a, int offset, int length) {
    if (offset < 0 || length <= 0 || offset + length > a->size())
        throw std::invalid_argument("slice: range [" + std::to_string(offset) + "," +
                                    std::to_string(offset + length) + ") out of bounds for " +
                                    shape_str(a->shape));
    auto out = out_like({length}, needs_grad(a));
    std::copy(a->value.begin() + offset, a->value.begin() + offset + length, out->value.begin());
    if (out->requires_grad) {
        tape.record([a, out, offset, length]() {
            for (int i = 0; i < length; ++i) a->grad[offset + i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr row(Tape& tape, const TensorPtr& a, int i) {
    if (a->shape.size() != 2) throw std::invalid_argument("row: expected 2-D tensor");
    return slice(tape, a, i * a->shape[1], a->shape[1]);
}

TensorPtr reshape(Tape& tape, const TensorPtr& a, std::vector<int> shape) {
    if (shape_size(shape) != a->size())
        throw std::invalid_argument("reshape: size mismatch " + shape_str(a->shape) + " -> " +
                                    shape_str(shape));
    auto out = make_tensor(std::move(shape), a->value, needs_grad(a));
    if (out->requires_grad) {
        tape.record([a, out]() {
            for (int i = 0; i < a->size(); ++i) a->grad[i] += out->grad[i];
        });
    }
    return out;
}

}  // namespace peg::ad
