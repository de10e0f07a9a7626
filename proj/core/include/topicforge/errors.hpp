#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topicforge {

/// A user-supplied configuration does not fit the data (missing column,
/// invalid lexicon file, unknown config key).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Structurally malformed CSV. `row()` is 1-based and counts the header row.
class ParseError : public std::runtime_error
{
public:
    ParseError(std::size_t row, const std::string& what)
        : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row)
    {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

} // namespace topicforge
