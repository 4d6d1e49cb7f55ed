#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cubemix/common.hpp"

namespace cubemix {

/// Dense real tensor. Canonical image layout is {W, H, C} with the channel
/// index fastest-varying; flat index of (x, y, c) is (x*H + y)*C + c.
/// Values are double precision throughout; checkpoints store float32.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor full(std::vector<int> shape, double value);
    static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    // rank-3 accessors for the {W,H,C} layout
    double at(int x, int y, int c) const {
        return data_[static_cast<std::size_t>((x * shape_[1] + y) * shape_[2] + c)];
    }
    double& at(int x, int y, int c) {
        return data_[static_cast<std::size_t>((x * shape_[1] + y) * shape_[2] + c)];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const;

    /// Sum of all elements.
    double sum() const;

    bool requires_grad = false;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

std::string shape_str(const std::vector<int>& shape);

/// Throws DimensionError unless both tensors share a shape.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

std::size_t checked_numel(const std::vector<int>& shape);

} // namespace cubemix
