#ifndef DIMED_ERRORS_HPP
#define DIMED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dimed {

// Input data or parameters violate a documented precondition.
// The CLI maps this to exit code 2.
class InvalidInput : public std::runtime_error {
public:
    explicit InvalidInput(const std::string& what_arg)
        : std::runtime_error(what_arg) {}
};

// The requested quantity cannot be computed from the data provided
// (e.g. a design weight is missing for a required moment).
// The CLI maps this to exit code 3.
class Unavailable : public std::runtime_error {
public:
    explicit Unavailable(const std::string& what_arg)
        : std::runtime_error(what_arg) {}
};

}  // namespace dimed

#endif  // DIMED_ERRORS_HPP
