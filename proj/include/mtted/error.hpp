#ifndef MTTED_ERROR_HPP
#define MTTED_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mtted {

/// Raised for malformed input data: bad files, invariant violations,
/// incompatible arguments. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mtted

#endif
