#pragma once

#include <stdexcept>
#include <string>

namespace debyefit {

/// Invalid parameters or inputs to a model or fitting routine.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation requested outside the range covered by tabulated data.
class OutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Bad optimizer or fitter configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed hashtag command. `position` is the 1-based index of the
/// offending field after the colon (0 when the command token itself is bad).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int position)
        : std::runtime_error(what), position_(position) {}

    int position() const noexcept { return position_; }

private:
    int position_;
};

} // namespace debyefit
