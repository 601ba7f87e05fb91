#include "bigen/params.hpp"

#include <cmath>

namespace bigen {
namespace {

void checkProbability(std::vector<FieldError>& out, const char* field, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    out.push_back({field, "must be a probability in [0, 1]"});
  }
}

std::string describe(const std::vector<FieldError>& errors) {
  std::string text = "invalid parameters:";
  for (const auto& e : errors) text += " " + e.field + " " + e.message + ";";
  return text;
}

}  // namespace

std::vector<FieldError> validate(const GeneratorParams& params) {
  std::vector<FieldError> errors;
  if (params.m < 1) errors.push_back({"m", "must be >= 1"});
  if (params.u < 1) errors.push_back({"u", "must be >= 1"});
  if (params.v < 1) errors.push_back({"v", "must be >= 1"});
  checkProbability(errors, "p", params.p);
  checkProbability(errors, "alpha", params.alpha);
  checkProbability(errors, "beta", params.beta);
  checkProbability(errors, "bounce", params.bounce);
  return errors;
}

ParamError::ParamError(std::vector<FieldError> errs)
    : std::invalid_argument(describe(errs)), errors(std::move(errs)) {}

ParamError::ParamError(std::string field, std::string message)
    : ParamError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}

void ensureValid(const GeneratorParams& params) {
  auto errors = validate(params);
  if (!errors.empty()) throw ParamError(std::move(errors));
}

bool ParamPatch::empty() const {
  return !m && !iterations && !p && !u && !v && !alpha && !beta && !bounce;
}

GeneratorParams patched(const GeneratorParams& base, const ParamPatch& patch) {
  if (patch.m) {
    throw ParamError("m", "the initial pair count cannot change after start");
  }
  GeneratorParams next = base;
  if (patch.iterations) next.iterations = *patch.iterations;
  if (patch.p) next.p = *patch.p;
  if (patch.u) next.u = *patch.u;
  if (patch.v) next.v = *patch.v;
  if (patch.alpha) next.alpha = *patch.alpha;
  if (patch.beta) next.beta = *patch.beta;
  if (patch.bounce) next.bounce = *patch.bounce;
  ensureValid(next);
  return next;
}

DerivedParams derive(const GeneratorParams& params) {
  DerivedParams d;
  d.eta = params.p * params.u + (1.0 - params.p) * params.v;
  if (params.p > 0.0) d.avgUserDegree = d.eta / params.p;
  if (params.p < 1.0) d.avgItemDegree = d.eta / (1.0 - params.p);
  return d;
}

}  // namespace bigen
