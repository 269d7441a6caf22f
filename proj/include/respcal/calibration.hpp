#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "respcal/oracle.hpp"
#include "respcal/types.hpp"

namespace respcal {

/// Maps a clustered prefix to per-sample reliabilities in [0,1].
/// Nonconformity of sample m is 1 - reliability[m].
class ReliabilityMeasure {
 public:
  virtual ~ReliabilityMeasure() = default;
  virtual std::vector<double> reliability(const QARecord& record,
                                          const ClusterAssignment& assignment) const = 0;
  virtual std::string name() const = 0;
};

using MeasurePtr = std::shared_ptr<const ReliabilityMeasure>;

/// Normalized self-consistency frequency F.
MeasurePtr frequency_measure();

/// Semantic diversity divided by its maximum within the record (all zero if the max is 0).
MeasurePtr diversity_measure(SimilarityPtr similarity);

/// "frequency" or "semantic-diversity" (indicator similarity over `oracle`),
/// or "semantic-diversity:lexical".
MeasurePtr make_measure(const std::string& selector, OraclePtr oracle);

/// 1-based index of the first sample equivalent to the reference, or Infinite.
ScoreValue conformal_score(const QARecord& record, const EquivalenceOracle& oracle);

/// ceil((n + 1)(1 - risk)); throws InfeasibleRiskLevel when it exceeds n.
std::size_t quantile_rank(std::size_t n, double risk);

/// The quantile_rank(n, risk)-th smallest score (stable ascending sort).
ScoreValue empirical_quantile(std::span<const ScoreValue> scores, double risk);

std::int64_t calibrate_sampling(std::span<const QARecord> cal, double alpha,
                                const EquivalenceOracle& oracle);

/// 1 - reliability of the earliest acceptable sample within the first
/// `prefix_len` samples (all samples when omitted); 1 when none is acceptable.
ScoreValue nonconformity_score(const QARecord& record, const EquivalenceOracle& oracle,
                               const ReliabilityMeasure& measure,
                               std::optional<std::size_t> prefix_len = std::nullopt);

double calibrate_threshold(std::span<const QARecord> cal, double beta,
                           const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                           std::optional<std::size_t> prefix_len = std::nullopt);

/// Two-step calibration. Stage-2 scores are taken over the first r-hat
/// samples of each calibration record, the same prefix predict() clusters.
CalibrationResult calibrate(std::span<const QARecord> cal, const RiskBudget& budget,
                            const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                            Provenance provenance = {});

}  // namespace respcal
