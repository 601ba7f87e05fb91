#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bigen {

// The eight model parameters.
struct GeneratorParams {
  std::uint32_t m = 50;             // initial user-item pairs
  std::uint64_t iterations = 10000; // T
  double p = 0.5;                   // probability that a new node is a user
  std::uint32_t u = 7;              // edges requested by a new user
  std::uint32_t v = 7;              // edges requested by a new item
  double alpha = 0.5;               // new user's edge attaches preferentially
  double beta = 0.5;                // new item's edge attaches preferentially
  double bounce = 0.0;              // preferential edge is produced by bouncing

  bool operator==(const GeneratorParams&) const = default;
};

struct FieldError {
  std::string field;
  std::string message;

  bool operator==(const FieldError&) const = default;
};

// Empty when the parameters are valid.
std::vector<FieldError> validate(const GeneratorParams& params);

class ParamError : public std::invalid_argument {
 public:
  explicit ParamError(std::vector<FieldError> errors);
  ParamError(std::string field, std::string message);
  std::vector<FieldError> errors;
};

// Throws ParamError listing every invalid field.
void ensureValid(const GeneratorParams& params);

// Partial update. `m` is representable only so that an attempt to change it
// can be detected and rejected.
struct ParamPatch {
  std::optional<std::uint32_t> m;
  std::optional<std::uint64_t> iterations;
  std::optional<double> p;
  std::optional<std::uint32_t> u;
  std::optional<std::uint32_t> v;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> bounce;

  bool empty() const;
  bool operator==(const ParamPatch&) const = default;
};

// Returns the patched parameters. Throws ParamError if the patch touches m or
// the result is invalid.
GeneratorParams patched(const GeneratorParams& base, const ParamPatch& patch);

struct DerivedParams {
  double eta = 0;                       // p*u + (1-p)*v
  std::optional<double> avgUserDegree;  // eta / p, absent at p = 0
  std::optional<double> avgItemDegree;  // eta / (1-p), absent at p = 1
};

DerivedParams derive(const GeneratorParams& params);

}  // namespace bigen
