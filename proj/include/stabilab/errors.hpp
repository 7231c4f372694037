#pragma once

#include <stdexcept>
#include <string>

namespace stabilab {

// Violated contract on inputs (bad config, frequency out of range,
// uncertified symbol, ...).  The CLI maps this to exit code 2.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// The requested goal cannot be met (regime casework has no admissible
// parameters, control target unreachable at this resolution, sweep
// exhausted).  The CLI maps this to exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stabilab
