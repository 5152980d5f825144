#pragma once

#include <string>

#include "plmdp/types.hpp"

namespace plmdp {

/// Reads a headerless CSV of reals (rows = samples). Lines starting
/// with '#' are skipped. Throws std::runtime_error with the line
/// number on malformed input.
Matrix read_csv_matrix(const std::string& path);

/// Single-column (or single-row) variant.
Vector read_csv_vector(const std::string& path);

/// Serialises a double with 17 significant digits (round-trip exact).
std::string format_full(double v);

}  // namespace plmdp
