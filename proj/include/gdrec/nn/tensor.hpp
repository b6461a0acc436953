// Dense row-major double tensors, the value type of the autodiff tape.
#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "gdrec/common.hpp"

namespace gdrec::nn {

struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(static_cast<std::size_t>(count(shape)), 0.0);
    }
    Tensor(std::vector<int> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != static_cast<std::size_t>(count(shape)))
            throw ShapeError("tensor: data length does not match shape");
    }

    static long count(const std::vector<int>& s) {
        long n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeError("tensor: nonpositive dimension");
            n *= d;
        }
        return n;
    }

    long size() const { return static_cast<long>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<int> s, double v) {
        Tensor t(std::move(s));
        for (double& x : t.data) x = v;
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    // uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
    static Tensor uniform_fan_in(std::vector<int> s, int fan_in, Rng& rng) {
        Tensor t(std::move(s));
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& x : t.data) x = (2.0 * rng.unit() - 1.0) * bound;
        return t;
    }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Parallel toggle for the heavy kernels (matmul, conv). Parallel execution
// is bit-identical to serial: each output element is owned by one thread.
void set_parallel(bool enabled);
bool parallel_enabled();

}  // namespace gdrec::nn
