#pragma once

#include <stdexcept>
#include <string>

namespace ransomlab {

// Single exception type for all operational failures. Messages start with a
// stable phrase ("malformed hex", "envelope open failure", ...) that callers
// and tests key on; anything after a ':' is free-form detail.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ransomlab
