#include "jacshield/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace jacshield {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 in (0,1] to keep log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw Error("uniform_index: n must be positive");
    // modulo bias is irrelevant at the sizes used here (n << 2^64)
    return static_cast<std::size_t>(next_u64() % n);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    Rng r(seed ^ (tag * 0xD1B54A32D192ED03ull + 0x9E3779B97F4A7C15ull));
    return r.next_u64();
}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (numel(shape) != data.size()) {
        throw Error("tensor: shape " + shape_to_string(shape) + " does not match data length " +
                    std::to_string(data.size()));
    }
}

Tensor Tensor::zeros(const Shape& s) { return Tensor(s, std::vector<double>(numel(s), 0.0)); }

Tensor Tensor::full(const Shape& s, double value) {
    return Tensor(s, std::vector<double>(numel(s), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::from_vector(std::vector<double> d) {
    Shape s{d.size()};
    return Tensor(std::move(s), std::move(d));
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::check_invariants() const {
    if (numel(shape) != data.size()) {
        throw Error("tensor: shape/data length mismatch");
    }
    for (std::size_t d : shape) {
        if (d == 0) throw Error("tensor: zero dimension in shape " + shape_to_string(shape));
    }
    if (!all_finite()) throw NumericError("tensor: non-finite value");
}

double Tensor::l2_norm() const { return jacshield::l2_norm(data); }

double Tensor::linf_norm() const {
    double m = 0.0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

std::size_t Tensor::l0_norm() const {
    std::size_t n = 0;
    for (double v : data) {
        if (v != 0.0) ++n;
    }
    return n;
}

bool Tensor::same_as(const Tensor& other) const {
    if (shape != other.shape || data.size() != other.data.size()) return false;
    if (data.empty()) return true;
    return std::memcmp(data.data(), other.data.data(), data.size() * sizeof(double)) == 0;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) {
        throw Error("tensor subtraction: shape mismatch " + shape_to_string(a.shape) + " vs " +
                    shape_to_string(b.shape));
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace jacshield
