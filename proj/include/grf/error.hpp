#pragma once

#include <stdexcept>
#include <string>

namespace grf {

// Error taxonomy mirrors the CLI exit codes:
//   ParamError   -> 2 (usage / parameter / contract violations)
//   DataError    -> 3 (malformed files, bad magic, parse failures)
//   NumericError -> 4 (NaN/overflow, degenerate numerics, training aborts)
struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace grf
