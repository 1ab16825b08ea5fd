#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace czgrid {

// Largest horizontal dimension supported by the fixed-capacity coordinate
// arrays. Points and cubes carry their actual dimension alongside.
inline constexpr int kMaxDim = 8;

using Coords = std::array<double, kMaxDim>;
using Lattice = std::array<std::int64_t, kMaxDim>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation does not hold (wrong regime,
// failed side condition, bad parameter).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A query needs grid levels or chain entries that were not built.
class HorizonError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Neither split mode produced admissible children.
class SplitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void check_dimension(int n) {
    if (n < 1 || n > kMaxDim) {
        throw DimensionError("dimension must be in [1, " + std::to_string(kMaxDim) +
                             "], got " + std::to_string(n));
    }
}

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace czgrid
