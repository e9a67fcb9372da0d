#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace colligo {

using Scalar = double;
using Vec = Eigen::VectorXd;
// Parameter tables and embedding indices are row-major: one row per token or
// product, so row slices are contiguous and serialization is a flat copy.
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Bad bounds, bad fields, impossible presets.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input files; message carries the line number where known.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Unknown ids, dimension mismatches and other contract violations.
struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace colligo
