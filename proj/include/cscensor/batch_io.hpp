#pragma once

#include <iosfwd>
#include <string>

#include "cscensor/fusion.hpp"

namespace cscensor {

/// Shortest decimal text that parses back to the same double.
std::string to_text(double value);

/// Columnar text form of a fusion batch, one active node per line in
/// ascending node order:
///
///     # cscensor fusion batch v1
///     N <ambient dimension>
///     M <number of nodes>
///     kind node value support signs
///     value 3 -0.4125 2,17,40 +1,-1,+1
///     hard 5 0 1,9,33 -1,-1,+1
///
/// Node and support indices are 1-based. Hard-decision rows carry the cleaned
/// value 0.
void write_batch(std::ostream& out, const FusionBatch<double>& batch);

/// Inverse of write_batch. Throws std::runtime_error on malformed input.
FusionBatch<double> read_batch(std::istream& in);

}  // namespace cscensor
