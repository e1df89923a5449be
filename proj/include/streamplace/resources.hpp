#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace streamplace {

// Absolute tolerance for resource and cost comparisons on real-valued inputs.
// Integral inputs compare exactly because every value stays far below 2^53.
inline constexpr double kTolerance = 1e-9;

/// K-dimensional nonnegative quantity vector (demands, capacities, free space).
class ResourceVector {
public:
    ResourceVector() = default;
    explicit ResourceVector(std::size_t dims, double fill = 0.0) : values_(dims, fill) {}
    ResourceVector(std::initializer_list<double> values) : values_(values) {}
    explicit ResourceVector(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t dims() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool nonnegative() const noexcept {
        for (double v : values_) {
            if (!(v >= 0.0)) return false;
        }
        return true;
    }

    bool strictly_positive() const noexcept {
        for (double v : values_) {
            if (!(v > 0.0)) return false;
        }
        return true;
    }

    ResourceVector& operator+=(const ResourceVector& other) {
        check_dims(other);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
        return *this;
    }

    ResourceVector& operator-=(const ResourceVector& other) {
        check_dims(other);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
        return *this;
    }

    friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
    friend ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }
    friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

    /// Componentwise partial order a ⪯ b, within kTolerance.
    bool fits_within(const ResourceVector& bound) const {
        check_dims(bound);
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (values_[k] > bound.values_[k] + kTolerance) return false;
        }
        return true;
    }

    double euclidean_norm() const noexcept {
        double sum = 0.0;
        for (double v : values_) sum += v * v;
        return std::sqrt(sum);
    }

    std::string to_string() const {
        std::string out = "(";
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (k) out += ", ";
            out += std::to_string(values_[k]);
        }
        return out + ")";
    }

private:
    void check_dims(const ResourceVector& other) const {
        if (other.values_.size() != values_.size()) {
            throw std::invalid_argument("resource vectors of different dimension: " +
                                        std::to_string(values_.size()) + " vs " +
                                        std::to_string(other.values_.size()));
        }
    }

    std::vector<double> values_;
};

inline double euclidean_distance(const ResourceVector& a, const ResourceVector& b) {
    return (a - b).euclidean_norm();
}

}  // namespace streamplace
