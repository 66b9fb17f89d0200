#pragma once

#include <stdexcept>
#include <string>

namespace nufocus {

// Base of every error the library throws. The tag is a stable, single-word
// identifier that the CLI prints so failures can be grepped from logs.
class Error : public std::runtime_error {
 public:
  Error(std::string tag, const std::string& message)
      : std::runtime_error(message), tag_(std::move(tag)) {}

  const std::string& tag() const noexcept { return tag_; }
  virtual int exit_code() const noexcept = 0;

 private:
  std::string tag_;
};

/// Bad input: unreadable file, syntax error, or a violated parameter invariant.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error("ConfigError", key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  /// Fully qualified key (`section.name`) the error refers to, if any.
  const std::string& key() const noexcept { return key_; }
  int exit_code() const noexcept override { return 1; }

 private:
  std::string key_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class NonpositiveFrequency : public NumericalError {
 public:
  explicit NonpositiveFrequency(const std::string& m) : NumericalError("NonpositiveFrequency", m) {}
};

class NonUnitary : public NumericalError {
 public:
  explicit NonUnitary(const std::string& m) : NumericalError("NonUnitary", m) {}
};

class NoExcitation : public NumericalError {
 public:
  explicit NoExcitation(const std::string& m) : NumericalError("NoExcitation", m) {}
};

class NonContractive : public NumericalError {
 public:
  explicit NonContractive(const std::string& m) : NumericalError("NonContractive", m) {}
};

class ZeroRate : public NumericalError {
 public:
  explicit ZeroRate(const std::string& m) : NumericalError("ZeroRate", m) {}
};

class MisalignedTables : public NumericalError {
 public:
  explicit MisalignedTables(const std::string& m) : NumericalError("MisalignedTables", m) {}
};

class UnstableStep : public NumericalError {
 public:
  UnstableStep(const std::string& m, double max_dt)
      : NumericalError("UnstableStep", m), max_dt_(max_dt) {}

  /// Largest time step that satisfies the explicit-step stability bound.
  double max_dt() const noexcept { return max_dt_; }

 private:
  double max_dt_;
};

}  // namespace nufocus
