#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgrag {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A TSV line whose field count is not exactly three.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_number, std::string content)
      : Error("malformed line " + std::to_string(line_number) + ": '" +
              content + "'"),
        line_number_(line_number),
        content_(std::move(content)) {}

  std::size_t line_number() const { return line_number_; }
  const std::string& content() const { return content_; }

 private:
  std::size_t line_number_;
  std::string content_;
};

class UnknownEntity : public Error {
 public:
  using Error::Error;
};

class InvalidTriple : public Error {
 public:
  using Error::Error;
};

class BudgetTooSmall : public Error {
 public:
  using Error::Error;
};

// A JSON-lines record that does not satisfy the expected schema.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line_number, const std::string& what)
      : Error("line " + std::to_string(line_number) + ": " + what),
        line_number_(line_number) {}

  std::size_t line_number() const { return line_number_; }

 private:
  std::size_t line_number_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgrag
