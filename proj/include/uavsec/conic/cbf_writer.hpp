#pragma once

#include <ostream>
#include <string>

#include "uavsec/conic/program.hpp"

namespace uavsec::conic {

/// Writes the program in Conic Benchmark Format (CBF version 3) for
/// cross-checking with external solvers. Each log term w*log2(x + c) becomes
/// an epigraph variable r with (x + c, 1, r) in the exponential cone.
void write_cbf(const ConicProgram& program, std::ostream& out);
void write_cbf_file(const ConicProgram& program, const std::string& path);

}  // namespace uavsec::conic
