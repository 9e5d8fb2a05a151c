#pragma once

#include <stdexcept>
#include <string>

namespace cohere {

// Library errors carry a short machine-readable kind plus a human message.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

class ParseError : public Error {
  public:
    ParseError(int line, const std::string& message)
        : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

} // namespace cohere
