// errors.hpp - Exception types shared by the library and the command-line tool

#pragma once

#include <stdexcept>
#include <string>

namespace decometric {

/// A numerical procedure (quadrature, enumeration bound) failed to meet its contract.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration document. `field` is a JSON pointer, `line`/`column` are
/// 1-based and zero when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(format(field, what, line, column)),
          field_(std::move(field)),
          line_(line),
          column_(column) {}

    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& field, const std::string& what, std::size_t line,
                              std::size_t column) {
        std::string out = "config";
        if (line != 0) out += ":" + std::to_string(line) + ":" + std::to_string(column);
        if (!field.empty()) out += " at " + field;
        return out + ": " + what;
    }

    std::string field_;
    std::size_t line_;
    std::size_t column_;
};

} // namespace decometric
