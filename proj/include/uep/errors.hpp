#pragma once

#include <stdexcept>
#include <string>

namespace uep {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid construction parameters (code dimensions, channel fit, config values).
struct ParamError : Error {
    using Error::Error;
};

// A rate falls outside the profile's tabulated range.
struct RangeError : Error {
    using Error::Error;
};

// Malformed or invariant-violating input file.
struct ParseError : Error {
    using Error::Error;
};

// An interleaving block cannot hold the requested codewords.
struct LayoutError : Error {
    using Error::Error;
};

// Optimizer failed to converge; message carries the last iterate.
struct SolverError : Error {
    using Error::Error;
};

}  // namespace uep
