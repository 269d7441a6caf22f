#include "respcal/prediction.hpp"

#include <string>

#include "respcal/clustering.hpp"
#include "respcal/error.hpp"

namespace respcal {

PredictionSet predict(const QARecord& record, const CalibrationResult& calibration,
                      const EquivalenceOracle& oracle, const ReliabilityMeasure& measure) {
  validate_record(record, false);
  const auto budget = static_cast<std::size_t>(calibration.sample_budget);
  if (calibration.sample_budget < 1 || record.samples.size() < budget) {
    throw Error(ErrorCode::kInsufficientSamples,
                "record '" + record.id + "' has " + std::to_string(record.samples.size()) +
                    " samples; the calibrated budget needs " +
                    std::to_string(calibration.sample_budget));
  }

  const auto assignment = cluster(record, oracle, budget);
  const auto rel = measure.reliability(record, assignment);

  PredictionSet out;
  out.record_id = record.id;
  std::vector<std::size_t> kept;
  for (std::size_t m = 0; m < budget; ++m) {
    if (1.0 - rel[m] <= calibration.threshold) {
      out.raw_members.push_back({m, record.samples[m], rel[m]});
      kept.push_back(m);
    }
  }
  for (const std::size_t m : dedup(kept, record, oracle)) {
    out.dedup_members.push_back({m, record.samples[m], rel[m]});
  }
  return out;
}

}  // namespace respcal
