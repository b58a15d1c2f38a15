#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace peg::ad {

// Dense row-major tensor. Grad buffer exists iff requires_grad.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;

    int size() const { return static_cast<int>(value.size()); }

    double& at(int i) { return value[static_cast<size_t>(i)]; }
    double at(int i) const { return value[static_cast<size_t>(i)]; }

    int rows() const { return shape.empty() ? 1 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline int shape_size(const std::vector<int>& shape) {
    int n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

inline std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

inline TensorPtr make_tensor(std::vector<int> shape, std::vector<double> value,
                             bool requires_grad = false) {
    int n = shape_size(shape);
    if (n != static_cast<int>(value.size()))
        throw std::invalid_argument("tensor data length " + std::to_string(value.size()) +
                                    " does not match shape " + shape_str(shape));
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->value = std::move(value);
    t->requires_grad = requires_grad;
    if (requires_grad) t->grad.assign(t->value.size(), 0.0);
    return t;
}

inline TensorPtr zeros(std::vector<int> shape, bool requires_grad = false) {
    int n = shape_size(shape);
    return make_tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0),
                       requires_grad);
}

inline TensorPtr scalar(double v, bool requires_grad = false) {
    return make_tensor({1}, {v}, requires_grad);
}

// Define-by-run operation record. Backward sweeps the records in exact
// reverse append order; every op appends after its inputs by construction.
class Tape {
public:
    void record(std::function<void()> backward_fn) {
        records_.push_back(std::move(backward_fn));
    }

    // Seeds grad(loss) = 1 and runs every recorded closure in reverse.
    // Leaf gradients accumulate additively across uses.
    void backward(const TensorPtr& loss) {
        if (loss->size() != 1)
            throw std::invalid_argument("backward requires a scalar loss, got shape " +
                                        shape_str(loss->shape));
        if (!loss->requires_grad) return;
        loss->grad[0] += 1.0;
        for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
    }

    size_t size() const { return records_.size(); }
    void clear() { records_.clear(); }

private:
    std::vector<std::function<void()>> records_;
};

}  // namespace peg::ad
