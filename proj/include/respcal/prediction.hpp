#pragma once

#include "respcal/calibration.hpp"
#include "respcal/oracle.hpp"
#include "respcal/types.hpp"

namespace respcal {

/// Clusters the first r-hat samples and keeps every sample whose
/// nonconformity is at most s-hat. Throws InsufficientSamples when the record
/// has fewer than r-hat samples.
PredictionSet predict(const QARecord& record, const CalibrationResult& calibration,
                      const EquivalenceOracle& oracle, const ReliabilityMeasure& measure);

}  // namespace respcal
