#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace newsynth {

// Every domain failure carries a stable machine-readable code so that the
// CLI can map it to an exit status and the service to an HTTP status.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

class FileNotFound : public Error {
 public:
  explicit FileNotFound(const std::string& path)
      : Error("FileNotFound", "cannot open file: " + path, path) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& why = "missing or invalid")
      : Error("SchemaError",
              "line " + std::to_string(line) + ": field \"" + field + "\" " + why,
              field),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace newsynth
