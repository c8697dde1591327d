#pragma once

#include <stdexcept>
#include <string>

namespace dplqr {

//! Base exception. Every error carries a short machine-readable category
//! ("dimension", "config", "data", "numerical", "io") used by the CLI.
class Error : public std::runtime_error
{
public:
  Error(std::string category, const std::string& what)
    : std::runtime_error(what)
    , category_(std::move(category))
  {}

  const std::string& category() const noexcept { return category_; }

private:
  std::string category_;
};

struct DimensionError : Error
{
  explicit DimensionError(const std::string& what)
    : Error("dimension", what)
  {}
};

struct ConfigError : Error
{
  explicit ConfigError(const std::string& what)
    : Error("config", what)
  {}
};

struct DataError : Error
{
  explicit DataError(const std::string& what)
    : Error("data", what)
  {}
};

struct NumericalError : Error
{
  explicit NumericalError(const std::string& what)
    : Error("numerical", what)
  {}
};

//! Raised by the Cholesky-based inverse; `pivot` is the offending row.
struct SingularMatrixError : NumericalError
{
  SingularMatrixError(std::size_t pivot, const std::string& what)
    : NumericalError(what)
    , pivot(pivot)
  {}
  std::size_t pivot;
};

struct IoError : Error
{
  explicit IoError(const std::string& what)
    : Error("io", what)
  {}
};

} // namespace dplqr
