#include "snnattack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace snnattack {

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(shape_count(shape), fill) {}

Tensor Tensor::from(std::vector<std::size_t> dims, std::vector<double> values) {
    if (shape_count(dims) != values.size()) {
        throw ConfigError("tensor data length " + std::to_string(values.size()) +
                          " does not match shape " + shape_str(dims));
    }
    Tensor t;
    t.shape = std::move(dims);
    t.data = std::move(values);
    return t;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

double Tensor::sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

bool Tensor::all_zero() const {
    for (double v : data) {
        if (v != 0.0) return false;
    }
    return true;
}

std::size_t shape_count(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& dims) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << ",";
        os << dims[i];
    }
    os << ")";
    return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ConfigError(std::string(what) + ": shape mismatch " + shape_str(a.shape) +
                          " vs " + shape_str(b.shape));
    }
}

} // namespace snnattack
