#pragma once

/**
 * Shared basic types and errors for the retrostar library.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace retrostar {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Difference new - old, defined as 0 when both are equal (including +inf == +inf).
inline double finite_delta(double new_value, double old_value) {
    if (new_value == old_value) return 0.0;
    return new_value - old_value;
}

struct SearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExpandOnExpandedNode : SearchError {
    ExpandOnExpandedNode() : SearchError("expand called on an already expanded node") {}
};

struct ExpandOnAvailable : SearchError {
    ExpandOnAvailable() : SearchError("expand called on an available molecule node") {}
};

struct EmptyFrontier : SearchError {
    EmptyFrontier() : SearchError("selection from an empty frontier") {}
};

struct NoRouteFound : SearchError {
    NoRouteFound() : SearchError("route extraction requested but root is not solved") {}
};

struct ParseError : SearchError {
    ParseError(const std::string& what, std::size_t line)
        : SearchError(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

struct DimensionMismatch : SearchError {
    using SearchError::SearchError;
};

struct EmptyDataset : SearchError {
    EmptyDataset() : SearchError("training requires a nonempty dataset") {}
};

struct IndexOutOfRange : SearchError {
    using SearchError::SearchError;
};

struct MissingReference : SearchError {
    MissingReference() : SearchError("route comparison requested without reference data") {}
};

}  // namespace retrostar
