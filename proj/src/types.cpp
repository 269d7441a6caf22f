#include "respcal/types.hpp"

#include <cmath>

#include "respcal/error.hpp"

namespace respcal {

const QARecord& validate_record(const QARecord& record, bool require_label) {
  if (record.samples.empty()) {
    throw Error(ErrorCode::kEmptySamples, "record '" + record.id + "' has no samples");
  }
  if (require_label && !record.labeled()) {
    throw Error(ErrorCode::kMissingLabel, "record '" + record.id + "' has no reference answer");
  }
  return record;
}

ScoreValue ScoreValue::rank(std::int64_t index) {
  if (index < 1) {
    throw Error(ErrorCode::kInvalidArgument, "conformal score must be >= 1");
  }
  return ScoreValue(static_cast<double>(index), false);
}

ScoreValue ScoreValue::unit(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "nonconformity score must lie in [0,1]");
  }
  return ScoreValue(value, false);
}

double ScoreValue::value() const {
  if (infinite_) {
    throw Error(ErrorCode::kInvalidArgument, "value() of an Infinite score");
  }
  return value_;
}

RiskBudget::RiskBudget(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  auto in_open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in_open_unit(alpha) || !in_open_unit(beta)) {
    throw Error(ErrorCode::kInvalidArgument, "risk levels must lie in (0,1)");
  }
}

SetSizes set_sizes(const PredictionSet& set) noexcept {
  return {set.raw_members.size(), set.dedup_members.size()};
}

}  // namespace respcal
