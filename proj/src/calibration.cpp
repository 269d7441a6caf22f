#include "respcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "respcal/clustering.hpp"
#include "respcal/error.hpp"

namespace respcal {
namespace {

class FrequencyMeasure final : public ReliabilityMeasure {
 public:
  std::vector<double> reliability(const QARecord&, const ClusterAssignment& a) const override {
    return a.frequencies;
  }
  std::string name() const override { return "frequency"; }
};

class DiversityMeasure final : public ReliabilityMeasure {
 public:
  explicit DiversityMeasure(SimilarityPtr sim) : sim_(std::move(sim)) {}

  std::vector<double> reliability(const QARecord& record,
                                  const ClusterAssignment& a) const override {
    std::vector<double> out(a.prefix_len());
    for (std::size_t m = 0; m < out.size(); ++m) {
      out[m] = semantic_diversity(a, record, *sim_, m);
    }
    const double top = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
    for (double& v : out) {
      v = top > 0.0 ? v / top : 0.0;
    }
    return out;
  }

  std::string name() const override {
    return sim_->name() == "indicator" ? "semantic-diversity"
                                       : "semantic-diversity:" + sim_->name();
  }

 private:
  SimilarityPtr sim_;
};

void require_risk(double risk) {
  if (!(risk > 0.0 && risk < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "risk level must lie in (0,1)");
  }
}

std::optional<std::size_t> first_acceptable(const QARecord& record,
                                            const EquivalenceOracle& oracle, std::size_t limit) {
  for (std::size_t m = 0; m < limit; ++m) {
    if (oracle.equivalent(record.question, record.samples[m], *record.reference)) {
      return m;
    }
  }
  return std::nullopt;
}

}  // namespace

MeasurePtr frequency_measure() { return std::make_shared<FrequencyMeasure>(); }

MeasurePtr diversity_measure(SimilarityPtr similarity) {
  return std::make_shared<DiversityMeasure>(std::move(similarity));
}

MeasurePtr make_measure(const std::string& selector, OraclePtr oracle) {
  if (selector == "frequency") {
    return frequency_measure();
  }
  if (selector == "semantic-diversity") {
    return diversity_measure(indicator_similarity(std::move(oracle)));
  }
  if (selector == "semantic-diversity:lexical") {
    return diversity_measure(lexical_similarity());
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown measure '" + selector +
                  "' (expected frequency, semantic-diversity, semantic-diversity:lexical)");
}

ScoreValue conformal_score(const QARecord& record, const EquivalenceOracle& oracle) {
  validate_record(record, true);
  const auto first = first_acceptable(record, oracle, record.samples.size());
  return first ? ScoreValue::rank(static_cast<std::int64_t>(*first) + 1) : ScoreValue::infinite();
}

std::size_t quantile_rank(std::size_t n, double risk) {
  require_risk(risk);
  if (n == 0) {
    throw Error(ErrorCode::kEmptyCollection, "quantile of an empty calibration set");
  }
  // (n+1)(1-risk) can land a few ulps above an integer, e.g. 20 * (1 - 0.95).
  const long double target = static_cast<long double>(n + 1) * (1.0L - risk);
  const auto k = static_cast<std::size_t>(std::ceil(target - 1e-9L * static_cast<long double>(n + 1)));
  const std::size_t rank = std::max<std::size_t>(k, 1);
  if (rank > n) {
    throw Error(ErrorCode::kInfeasibleRiskLevel,
                "risk level " + std::to_string(risk) + " needs quantile rank " +
                    std::to_string(rank) + " > N = " + std::to_string(n) +
                    "; the smallest feasible level is 1 - N/(N+1) = " +
                    std::to_string(1.0 / static_cast<double>(n + 1)));
  }
  return rank;
}

ScoreValue empirical_quantile(std::span<const ScoreValue> scores, double risk) {
  const std::size_t rank = quantile_rank(scores.size(), risk);
  std::vector<ScoreValue> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoreValue& a, const ScoreValue& b) { return a < b; });
  return sorted[rank - 1];
}

std::int64_t calibrate_sampling(std::span<const QARecord> cal, double alpha,
                                const EquivalenceOracle& oracle) {
  quantile_rank(cal.size(), alpha);
  std::vector<ScoreValue> scores;
  scores.reserve(cal.size());
  for (const auto& record : cal) {
    scores.push_back(conformal_score(record, oracle));
  }
  const ScoreValue q = empirical_quantile(scores, alpha);
  if (q.is_infinite()) {
    const auto misses = std::count_if(scores.begin(), scores.end(),
                                      [](const ScoreValue& s) { return s.is_infinite(); });
    throw Error(ErrorCode::kUnboundedBudget,
                std::to_string(misses) + " of " + std::to_string(cal.size()) +
                    " calibration records never produced an acceptable sample; the "
                    "sample budget at alpha = " + std::to_string(alpha) + " is unbounded");
  }
  return static_cast<std::int64_t>(q.value());
}

ScoreValue nonconformity_score(const QARecord& record, const EquivalenceOracle& oracle,
                               const ReliabilityMeasure& measure,
                               std::optional<std::size_t> prefix_len) {
  validate_record(record, true);
  const std::size_t n = std::min(prefix_len.value_or(record.samples.size()), record.samples.size());
  const auto ref = first_acceptable(record, oracle, n);
  if (!ref) {
    return ScoreValue::unit(1.0);
  }
  const auto assignment = cluster(record, oracle, n);
  const auto rel = measure.reliability(record, assignment);
  return ScoreValue::unit(std::clamp(1.0 - rel[*ref], 0.0, 1.0));
}

double calibrate_threshold(std::span<const QARecord> cal, double beta,
                           const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                           std::optional<std::size_t> prefix_len) {
  quantile_rank(cal.size(), beta);
  std::vector<ScoreValue> scores;
  scores.reserve(cal.size());
  for (const auto& record : cal) {
    scores.push_back(nonconformity_score(record, oracle, measure, prefix_len));
  }
  return empirical_quantile(scores, beta).value();
}

CalibrationResult calibrate(std::span<const QARecord> cal, const RiskBudget& budget,
                            const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                            Provenance provenance) {
  for (const auto& record : cal) {
    validate_record(record, true);
  }
  // Both feasibility checks before any oracle traffic.
  quantile_rank(cal.size(), budget.alpha());
  quantile_rank(cal.size(), budget.beta());

  CalibrationResult result;
  result.budget = budget;
  result.calibration_size = cal.size();
  result.sample_budget = calibrate_sampling(cal, budget.alpha(), oracle);
  result.threshold = calibrate_threshold(cal, budget.beta(), oracle, measure,
                                         static_cast<std::size_t>(result.sample_budget));
  provenance.measure = measure.name();
  provenance.oracle = oracle.name();
  result.provenance = std::move(provenance);
  return result;
}

}  // namespace respcal
