#pragma once

#include <stdexcept>
#include <string>

namespace symcomplete {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition (empty cloud, non-unit normal, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input is valid but the geometry does not support the requested computation.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Point-cloud file could not be parsed. `position` is a byte offset for binary
/// bodies and a 1-based line number for text.
class ParseError : public Error {
public:
    enum class Unit { Byte, Line };

    ParseError(const std::string& message, Unit unit, std::size_t position)
        : Error(message + (unit == Unit::Byte ? " (at byte " : " (at line ") +
                std::to_string(position) + ")"),
          detail_(message),
          unit_(unit),
          position_(position) {}

    Unit unit() const { return unit_; }
    std::size_t position() const { return position_; }
    /// Message without the position suffix.
    const std::string& detail() const { return detail_; }

private:
    std::string detail_;
    Unit unit_;
    std::size_t position_;
};

}  // namespace symcomplete
