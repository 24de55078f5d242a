#include "esn/errors.hpp"

namespace esn {

void throw_dimension_mismatch(const std::string& what, long expected, long actual)
{
    throw DimensionError(what + ": expected " + std::to_string(expected) + ", got "
                         + std::to_string(actual));
}

} // namespace esn
