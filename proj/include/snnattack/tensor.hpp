#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snnattack/errors.hpp"

namespace snnattack {

// Dense row-major tensor of 64-bit reals. All kernels operate on these;
// shapes are plain dimension lists and every kernel validates the ones it
// relies on. Arithmetic is single-threaded and loop-ordered, so identical
// inputs give bit-identical outputs everywhere.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
    static Tensor from(std::vector<std::size_t> dims, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    std::size_t rank() const { return shape.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    void fill(double v);
    double sum() const;
    double max_abs() const;
    bool all_zero() const;
};

std::size_t shape_count(const std::vector<std::size_t>& dims);
std::string shape_str(const std::vector<std::size_t>& dims);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Channel-height-width geometry of one frame.
struct Shape3 {
    int c = 0;
    int h = 0;
    int w = 0;

    int count() const { return c * h * w; }
    bool operator==(const Shape3&) const = default;
};

} // namespace snnattack
