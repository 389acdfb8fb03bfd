#ifndef JACSHIELD_TENSOR_HPP
#define JACSHIELD_TENSOR_HPP

#include <cmath>
#include <span>
#include <vector>

#include "jacshield/common.hpp"

namespace jacshield {

// Dense row-major n-dimensional array of doubles. Values that enter or
// leave the computation graph are carried in this type; completed tensors
// are treated as immutable and may be shared across threads.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(Shape s, std::vector<double> d);

    static Tensor zeros(const Shape& s);
    static Tensor full(const Shape& s, double value);
    static Tensor scalar(double value);
    static Tensor from_vector(std::vector<double> d);  // shape {d.size()}

    std::size_t size() const { return data.size(); }
    bool is_scalar() const { return data.size() == 1; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // 2-D accessors (shape must be {rows, cols})
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }
    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

    bool all_finite() const;
    void check_invariants() const;  // throws NumericError / Error

    double l2_norm() const;
    double linf_norm() const;
    std::size_t l0_norm() const;  // count of nonzero entries

    bool same_as(const Tensor& other) const;  // shape + bitwise-equal data
};

Tensor operator-(const Tensor& a, const Tensor& b);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace jacshield

#endif
