#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace treecalc {

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

// Dense double-precision value. Shapes are explicit; there is no broadcasting
// machinery beyond the scalar case handled by the tape ops.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;
    bool requires_grad = false;

    Tensor() = default;

    Tensor(std::vector<int> shape_, double fill = 0.0)
        : shape(std::move(shape_)) {
        for (int d : shape)
            if (d <= 0) throw TensorError("non-positive dimension in shape " + shape_str(shape));
        data.assign(static_cast<std::size_t>(numel_of(shape)), fill);
    }

    Tensor(std::vector<int> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (numel_of(shape) != static_cast<long long>(data.size()))
            throw TensorError("shape " + shape_str(shape) + " does not match data length " +
                              std::to_string(data.size()));
    }

    static Tensor scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

    static Tensor vec(std::vector<double> v) {
        int n = static_cast<int>(v.size());
        return Tensor({n}, std::move(v));
    }

    static long long numel_of(const std::vector<int>& shape) {
        long long n = 1;
        for (int d : shape) n *= d;
        return n;
    }

    int numel() const { return static_cast<int>(data.size()); }
    bool is_scalar() const { return data.size() == 1; }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline void check_finite(const Tensor& t, const char* where) {
    if (!t.all_finite())
        throw TensorError(std::string("non-finite value produced by ") + where);
}

}  // namespace treecalc
