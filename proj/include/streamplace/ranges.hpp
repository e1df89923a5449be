#pragma once

#include <cstdint>
#include <stdexcept>

namespace streamplace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const RealRange&, const RealRange&) = default;
};

}  // namespace streamplace
