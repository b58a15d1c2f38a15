#pragma once

#include <random>
#include <string>
#include <vector>

#include "peg/tensor.hpp"

namespace peg::ad {

// Named trainable leaves in insertion order. The order is the canonical
// iteration order for the optimizer and gradient reduction.
class ParamStore {
public:
    TensorPtr add(const std::string& name, TensorPtr t) {
        for (const auto& [n, _] : entries_)
            if (n == name) throw std::invalid_argument("duplicate parameter: " + name);
        t->requires_grad = true;
        if (t->grad.size() != t->value.size()) t->grad.assign(t->value.size(), 0.0);
        entries_.emplace_back(name, t);
        return t;
    }

    TensorPtr get(const std::string& name) const {
        for (const auto& [n, t] : entries_)
            if (n == name) return t;
        throw std::out_of_range("unknown parameter: " + name);
    }

    bool has(const std::string& name) const {
        for (const auto& [n, _] : entries_)
            if (n == name) return true;
        return false;
    }

    void zero_grad() {
        for (auto& [_, t] : entries_) t->zero_grad();
    }

    const std::vector<std::pair<std::string, TensorPtr>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, TensorPtr>> entries_;
};

inline TensorPtr randn_tensor(std::vector<int> shape, std::mt19937_64& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    int n = shape_size(shape);
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = dist(rng);
    return make_tensor(std::move(shape), std::move(v));
}

}  // namespace peg::ad
