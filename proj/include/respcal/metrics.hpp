#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "respcal/calibration.hpp"
#include "respcal/oracle.hpp"
#include "respcal/types.hpp"

namespace respcal {

enum class SetView { kRaw, kDedup };

/// Fraction of records whose first r-hat samples hold no response equivalent to the label.
double stage1_eer(std::span<const QARecord> test, std::int64_t sample_budget,
                  const EquivalenceOracle& oracle);

/// Fraction of records whose raw prediction set holds no response equivalent to the label.
/// `sets` is parallel to `test`.
double stage2_eer(std::span<const QARecord> test, std::span<const PredictionSet> sets,
                  const EquivalenceOracle& oracle);

/// Mean set size of the chosen view. Throws EmptyCollection.
double apss(std::span<const PredictionSet> sets, SetView view);

/// Fraction of records whose modal response (max F over all samples, earliest
/// on ties) is equivalent to the label.
double acc(std::span<const QARecord> test, const EquivalenceOracle& oracle);

/// Predicts every test record with `calibration` and computes all metrics.
TrialReport evaluate(std::span<const QARecord> test, const CalibrationResult& calibration,
                     const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                     std::size_t n_cal);

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double split_ratio = 0.5;
  std::string status = "ok";  // "ok" or the error code name of a non-fatal failure
  TrialReport report;         // metrics are meaningful only when status == "ok"

  double epsilon() const { return alpha + beta - alpha * beta; }
  bool ok() const { return status == "ok"; }
};

struct SweepAggregate {
  double alpha = 0.0;
  double beta = 0.0;
  double split_ratio = 0.5;
  std::size_t n_trials = 0;
  std::size_t n_ok = 0;
  // mean / standard error over the ok trials
  double stage1_eer_mean = 0.0, stage1_eer_se = 0.0;
  double stage2_eer_mean = 0.0, stage2_eer_se = 0.0;
  double apss_raw_mean = 0.0, apss_raw_se = 0.0;
  double apss_dedup_mean = 0.0, apss_dedup_se = 0.0;
  double acc_mean = 0.0, acc_se = 0.0;

  double epsilon() const { return alpha + beta - alpha * beta; }
};

struct SweepTable {
  std::string measure;
  std::string oracle;
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
};

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<double> betas;
  double split_ratio = 0.5;
  std::uint64_t seed = 42;
  std::size_t trials = 1;
  std::size_t workers = 1;
};

/// Every (alpha, beta) grid point and trial. Trial t splits with
/// derive_seed(seed, t), so all grid points of a trial share one split.
/// InfeasibleRiskLevel / UnboundedBudget are recorded in the row's status.
SweepTable sweep(std::span<const QARecord> records, const EquivalenceOracle& oracle,
                 const ReliabilityMeasure& measure, const SweepConfig& config);

/// Groups rows by (alpha, beta, split_ratio) in first-appearance order.
std::vector<SweepAggregate> aggregate_rows(std::span<const SweepRow> rows);

/// Parses "start:stop:step" (inclusive stop) or a single value.
std::vector<double> parse_grid(const std::string& text);

}  // namespace respcal
