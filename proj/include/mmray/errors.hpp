#pragma once

#include <stdexcept>
#include <string>

namespace mmray {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file / configuration.
class InputError : public Error {
  public:
    using Error::Error;
};

/// A (material, frequency) pair is not present in the library.
class MissingMaterial : public Error {
  public:
    MissingMaterial(std::string name, double frequency_ghz, const std::string& what)
        : Error(what), name_(std::move(name)), frequency_ghz_(frequency_ghz) {}

    const std::string& name() const noexcept { return name_; }
    double frequency_ghz() const noexcept { return frequency_ghz_; }

  private:
    std::string name_;
    double frequency_ghz_;
};

/// A path needs a loss value (reflection or penetration) that the library marks as absent.
class UncalibratedInteraction : public Error {
  public:
    using Error::Error;
};

/// The calibration system cannot be solved (no rows, rank zero).
class NumericalError : public Error {
  public:
    using Error::Error;
};

}  // namespace mmray
