#pragma once

#include <stdexcept>
#include <string>

namespace ddos {

/// Malformed or inconsistent input: bad dimensions, unparsable files, invalid configs.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A NaN or infinity showed up where the computation requires finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ddos
