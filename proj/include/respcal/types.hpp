#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace respcal {

/// One question with its sampled responses in generation order.
///
/// `reference` is the acceptable answer used for calibration and evaluation;
/// it is absent on the prediction-only path.
struct QARecord {
  std::string id;
  std::string question;
  std::vector<std::string> samples;
  std::optional<std::string> reference;

  bool labeled() const noexcept { return reference.has_value(); }
  bool operator==(const QARecord&) const = default;
};

/// Returns `record` unchanged, or throws EmptySamples / MissingLabel.
const QARecord& validate_record(const QARecord& record, bool require_label);

/// A sortable calibration score: either a finite value or the Infinite marker.
///
/// Conformal scores (first acceptable sample index, 1-based) use `rank()`;
/// nonconformity scores use `unit()`. Infinite orders after every finite value.
class ScoreValue {
 public:
  static ScoreValue rank(std::int64_t index);
  static ScoreValue unit(double value);
  static ScoreValue infinite() noexcept { return ScoreValue(0.0, true); }

  bool is_infinite() const noexcept { return infinite_; }
  // Precondition: !is_infinite().
  double value() const;

  std::partial_ordering operator<=>(const ScoreValue& other) const noexcept {
    if (infinite_ || other.infinite_) {
      return infinite_ == other.infinite_ ? std::partial_ordering::equivalent
             : infinite_                  ? std::partial_ordering::greater
                                          : std::partial_ordering::less;
    }
    return value_ <=> other.value_;
  }
  bool operator==(const ScoreValue& other) const noexcept {
    return (*this <=> other) == std::partial_ordering::equivalent;
  }

 private:
  ScoreValue(double value, bool infinite) noexcept : value_(value), infinite_(infinite) {}

  double value_;
  bool infinite_;
};

/// Stage-1 and stage-2 risk levels; epsilon = 1 - (1 - alpha)(1 - beta).
class RiskBudget {
 public:
  RiskBudget(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double epsilon() const noexcept { return alpha_ + beta_ - alpha_ * beta_; }

 private:
  double alpha_;
  double beta_;
};

struct Provenance {
  std::uint64_t seed = 0;
  double split_ratio = 1.0;
  std::string measure;
  std::string oracle;
};

struct CalibrationResult {
  std::int64_t sample_budget = 0;  // r-hat
  double threshold = 0.0;          // s-hat
  RiskBudget budget{0.1, 0.1};
  std::size_t calibration_size = 0;
  Provenance provenance;
};

struct SetMember {
  std::size_t sample = 0;  // 0-based index into the record's samples
  std::string text;
  double reliability = 0.0;  // frequency F (or the selected measure)
};

/// Prediction set for one test record, raw (duplicates kept) and deduplicated.
struct PredictionSet {
  std::string record_id;
  std::vector<SetMember> raw_members;
  std::vector<SetMember> dedup_members;
};

struct SetSizes {
  std::size_t raw = 0;
  std::size_t dedup = 0;
  bool operator==(const SetSizes&) const = default;
};

SetSizes set_sizes(const PredictionSet& set) noexcept;

/// Per-response equivalence lists and frequencies over a sample prefix.
struct ClusterAssignment {
  std::string record_id;
  // equivalents[m] lists (ascending, 0-based) every prefix index equivalent to m, m included.
  std::vector<std::vector<std::size_t>> equivalents;
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;

  std::size_t prefix_len() const noexcept { return equivalents.size(); }
};

struct TrialReport {
  double stage1_eer = 0.0;
  double stage2_eer = 0.0;
  double apss_raw = 0.0;
  double apss_dedup = 0.0;
  double acc = 0.0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  CalibrationResult calibration;
};

}  // namespace respcal
