#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "respcal/calibration.hpp"
#include "respcal/metrics.hpp"
#include "respcal/oracle.hpp"
#include "respcal/types.hpp"

namespace respcal {

/// Law assigning each synthetic question its per-draw probability of the correct answer.
struct ProbabilityLaw {
  enum class Kind { kFixed, kUniform, kTwoPoint };
  Kind kind = Kind::kUniform;
  double lo = 0.3;      // fixed value, uniform lower bound, or first atom
  double hi = 0.9;      // uniform upper bound or second atom
  double weight = 0.5;  // two-point: probability of the first atom

  static ProbabilityLaw fixed(double p) { return {Kind::kFixed, p, p, 1.0}; }
  static ProbabilityLaw uniform(double lo, double hi) { return {Kind::kUniform, lo, hi, 0.5}; }
  static ProbabilityLaw two_point(double p1, double p2, double w) {
    return {Kind::kTwoPoint, p1, p2, w};
  }

  /// "fixed:P", "uniform:LO:HI", or "twopoint:P1:P2:W".
  static ProbabilityLaw parse(const std::string& text);
  std::string to_string() const;
};

struct SyntheticSpec {
  std::size_t n_questions = 200;
  std::size_t max_samples = 30;
  ProbabilityLaw correct_prob_law;
  std::size_t distractor_count = 4;
  std::uint64_t seed = 42;
};

/// Each record draws max_samples i.i.d. answers: the correct token with
/// probability p, otherwise one of distractor_count wrong tokens uniformly.
/// Tokens are distinct per question so the exact oracle is a true partition.
std::vector<QARecord> synth_generate(const SyntheticSpec& spec);

/// Seeded split at split_ratio, calibrate on the first part, evaluate on the rest.
TrialReport run_trial(std::span<const QARecord> records, const RiskBudget& budget,
                      double split_ratio, std::uint64_t seed, const EquivalenceOracle& oracle,
                      const ReliabilityMeasure& measure);

struct GuaranteeVerdict {
  double alpha = 0.0;
  double epsilon = 0.0;
  std::size_t n_trials = 0;
  std::size_t n_ok = 0;  // trials that produced a finite calibration
  double stage1_eer_mean = 0.0, stage1_eer_se = 0.0;
  double stage2_eer_mean = 0.0, stage2_eer_se = 0.0;
  bool stage1_pass = false;
  bool stage2_pass = false;
  std::vector<SweepRow> rows;

  bool pass() const { return stage1_pass && stage2_pass; }
  std::string summary() const;
};

struct GuaranteeConfig {
  RiskBudget budget{0.1, 0.1};
  double split_ratio = 0.5;
  std::size_t n_trials = 500;
  std::size_t workers = 1;
};

/// Fresh synthetic data per trial (seed derived from spec.seed and the trial
/// index). PASS iff mean stage-1 EER <= alpha + 2 SE and mean stage-2 EER <=
/// epsilon + 2 SE. Trials whose calibration is infeasible or unbounded are
/// kept in `rows` with their status and excluded from the means; a verdict
/// with no ok trial fails.
GuaranteeVerdict validate_guarantee(const SyntheticSpec& spec, const GuaranteeConfig& config,
                                    const EquivalenceOracle& oracle,
                                    const ReliabilityMeasure& measure);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const { return num * o.den == o.num * den; }
};

inline constexpr std::size_t kMaxEnumeration = 12;

/// Treats each of the n+1 scores in turn as the test point, calibrates on the
/// other n at `risk`, and returns the exact fraction of covered choices.
/// Throws EnumerationTooLarge above kMaxEnumeration points.
Rational exact_coverage_small(std::span<const ScoreValue> scores, double risk);

}  // namespace respcal
