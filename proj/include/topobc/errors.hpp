// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace topobc {

// One broken constraint of a state distribution, e.g. {"unit-sum", 1.1}.
struct Violation {
  std::string constraint;
  double value = 0.0;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string describe(const std::vector<Violation>& v) {
    std::string msg = "invalid state distribution:";
    for (const auto& x : v) msg += " [" + x.constraint + " = " + std::to_string(x.value) + "]";
    return msg;
  }
  std::vector<Violation> violations_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config error at '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct HorizonTooShort : std::runtime_error {
  explicit HorizonTooShort(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroVector : std::runtime_error {
  ZeroVector() : std::runtime_error("cannot take orthogonal complement of the zero vector") {}
};

struct SingularSystem : std::runtime_error {
  explicit SingularSystem(const std::string& what) : std::runtime_error(what) {}
};

struct NonIntegerPhases : std::runtime_error {
  explicit NonIntegerPhases(const std::string& what) : std::runtime_error(what) {}
};

struct BudgetTooSmall : std::runtime_error {
  explicit BudgetTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : std::runtime_error {
  explicit LengthMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct UnpairableSchedule : std::runtime_error {
  explicit UnpairableSchedule(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateFit : std::runtime_error {
  explicit DegenerateFit(const std::string& what) : std::runtime_error(what) {}
};

struct RunFailed : std::runtime_error {
  explicit RunFailed(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace topobc
