#pragma once

#include <stdexcept>
#include <string>

namespace gasket {

/// Base of the library's numerical errors. name() is the stable identifier
/// reported by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class LevelGuard : public Error {
 public:
  LevelGuard(int n, int guard)
      : Error("LevelGuard", "level " + std::to_string(n) + " exceeds guard " + std::to_string(guard)) {}
};

/// The interior block of a trace or harmonic solve is not positive definite.
class SingularInterior : public Error {
 public:
  explicit SingularInterior(const std::string& what) : Error("SingularInterior", what) {}
};

class DimensionGuard : public Error {
 public:
  DimensionGuard(std::size_t dim, std::size_t guard)
      : Error("DimensionGuard", "dimension " + std::to_string(dim) + " exceeds guard " +
                                    std::to_string(guard)) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what) : Error("InsufficientData", what) {}
};

}  // namespace gasket
