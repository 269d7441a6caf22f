#include "respcal/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "parallel.hpp"
#include "respcal/dataset_io.hpp"
#include "respcal/error.hpp"
#include "respcal/rng.hpp"

namespace respcal {
namespace {

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

double draw_probability(const ProbabilityLaw& law, Rng& rng) {
  switch (law.kind) {
    case ProbabilityLaw::Kind::kFixed:
      return law.lo;
    case ProbabilityLaw::Kind::kUniform:
      return rng.uniform(law.lo, law.hi);
    case ProbabilityLaw::Kind::kTwoPoint:
      return rng.uniform() < law.weight ? law.lo : law.hi;
  }
  return law.lo;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ProbabilityLaw ProbabilityLaw::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string field;
  while (std::getline(in, field, ':')) {
    parts.push_back(field);
  }
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) {
        throw std::invalid_argument("trailing");
      }
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidSpec, "bad probability law '" + text + "'");
    }
  };
  ProbabilityLaw law;
  if (!parts.empty() && parts[0] == "fixed" && parts.size() == 2) {
    law = fixed(num(1));
  } else if (!parts.empty() && parts[0] == "uniform" && parts.size() == 3) {
    law = uniform(num(1), num(2));
  } else if (!parts.empty() && parts[0] == "twopoint" && parts.size() == 4) {
    law = two_point(num(1), num(2), num(3));
  } else {
    throw Error(ErrorCode::kInvalidSpec, "bad probability law '" + text +
                                             "' (fixed:P, uniform:LO:HI, twopoint:P1:P2:W)");
  }
  return law;
}

std::string ProbabilityLaw::to_string() const {
  switch (kind) {
    case Kind::kFixed:
      return "fixed:" + fmt_double(lo);
    case Kind::kUniform:
      return "uniform:" + fmt_double(lo) + ":" + fmt_double(hi);
    case Kind::kTwoPoint:
      return "twopoint:" + fmt_double(lo) + ":" + fmt_double(hi) + ":" + fmt_double(weight);
  }
  return "?";
}

std::vector<QARecord> synth_generate(const SyntheticSpec& spec) {
  const auto& law = spec.correct_prob_law;
  if (spec.n_questions < 2) {
    throw Error(ErrorCode::kInvalidSpec, "synthetic data needs at least 2 questions");
  }
  if (spec.max_samples < 1) {
    throw Error(ErrorCode::kInvalidSpec, "synthetic data needs at least 1 sample per question");
  }
  if (!in_unit(law.lo) || !in_unit(law.hi) || !in_unit(law.weight) ||
      (law.kind == ProbabilityLaw::Kind::kUniform && law.hi < law.lo)) {
    throw Error(ErrorCode::kInvalidSpec, "probability law out of range: " + law.to_string());
  }
  if (spec.distractor_count < 1) {
    throw Error(ErrorCode::kInvalidSpec, "synthetic data needs at least 1 distractor");
  }

  Rng rng(spec.seed);
  std::vector<QARecord> records;
  records.reserve(spec.n_questions);
  for (std::size_t i = 0; i < spec.n_questions; ++i) {
    const std::string tag = "q" + std::to_string(i);
    QARecord record;
    record.id = tag;
    record.question = "synthetic question " + std::to_string(i);
    record.reference = tag + "/correct";
    const double p = draw_probability(law, rng);
    record.samples.reserve(spec.max_samples);
    for (std::size_t m = 0; m < spec.max_samples; ++m) {
      if (rng.uniform() < p) {
        record.samples.push_back(*record.reference);
      } else {
        record.samples.push_back(tag + "/wrong" + std::to_string(rng.below(spec.distractor_count)));
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

TrialReport run_trial(std::span<const QARecord> records, const RiskBudget& budget,
                      double split_ratio, std::uint64_t seed, const EquivalenceOracle& oracle,
                      const ReliabilityMeasure& measure) {
  const auto parts = split(records, split_ratio, seed);
  const auto calibration = calibrate(parts.calibration, budget, oracle, measure,
                                     Provenance{seed, split_ratio, {}, {}});
  return evaluate(parts.test, calibration, oracle, measure, parts.calibration.size());
}

GuaranteeVerdict validate_guarantee(const SyntheticSpec& spec, const GuaranteeConfig& config,
                                    const EquivalenceOracle& oracle,
                                    const ReliabilityMeasure& measure) {
  if (config.n_trials == 0) {
    throw Error(ErrorCode::kInvalidArgument, "validate_guarantee needs at least one trial");
  }
  GuaranteeVerdict verdict;
  verdict.alpha = config.budget.alpha();
  verdict.epsilon = config.budget.epsilon();
  verdict.n_trials = config.n_trials;
  verdict.rows.resize(config.n_trials);

  detail::parallel_for(config.n_trials, config.workers, [&](std::size_t t) {
    SyntheticSpec trial_spec = spec;
    trial_spec.seed = derive_seed(spec.seed, t);
    SweepRow row;
    row.alpha = config.budget.alpha();
    row.beta = config.budget.beta();
    row.trial = t;
    row.seed = trial_spec.seed;
    row.split_ratio = config.split_ratio;
    const auto records = synth_generate(trial_spec);
    try {
      row.report = run_trial(records, config.budget, config.split_ratio,
                             derive_seed(trial_spec.seed, 1), oracle, measure);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleRiskLevel && e.code() != ErrorCode::kUnboundedBudget) {
        throw;
      }
      row.status = std::string(error_code_name(e.code()));
    }
    verdict.rows[t] = std::move(row);
  });

  const auto aggregates = aggregate_rows(verdict.rows);
  const auto& agg = aggregates.front();
  verdict.n_ok = agg.n_ok;
  verdict.stage1_eer_mean = agg.stage1_eer_mean;
  verdict.stage1_eer_se = agg.stage1_eer_se;
  verdict.stage2_eer_mean = agg.stage2_eer_mean;
  verdict.stage2_eer_se = agg.stage2_eer_se;
  verdict.stage1_pass =
      verdict.n_ok > 0 && verdict.stage1_eer_mean <= verdict.alpha + 2.0 * verdict.stage1_eer_se;
  verdict.stage2_pass =
      verdict.n_ok > 0 && verdict.stage2_eer_mean <= verdict.epsilon + 2.0 * verdict.stage2_eer_se;
  return verdict;
}

std::string GuaranteeVerdict::summary() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s  trials=%zu ok=%zu\n"
                "  stage 1: mean EER %.4f (SE %.4f) vs alpha   %.4f  %s\n"
                "  stage 2: mean EER %.4f (SE %.4f) vs epsilon %.4f  %s\n",
                pass() ? "PASS" : "FAIL", n_trials, n_ok, stage1_eer_mean, stage1_eer_se, alpha,
                stage1_pass ? "ok" : "VIOLATED", stage2_eer_mean, stage2_eer_se, epsilon,
                stage2_pass ? "ok" : "VIOLATED");
  return buf;
}

Rational exact_coverage_small(std::span<const ScoreValue> scores, double risk) {
  if (scores.size() > kMaxEnumeration) {
    throw Error(ErrorCode::kEnumerationTooLarge,
                std::to_string(scores.size()) + " points exceed the enumeration budget of " +
                    std::to_string(kMaxEnumeration));
  }
  if (scores.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "exact coverage needs n >= 1 calibration points");
  }
  std::int64_t covered = 0;
  std::vector<ScoreValue> rest;
  rest.reserve(scores.size() - 1);
  for (std::size_t t = 0; t < scores.size(); ++t) {
    rest.clear();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (i != t) {
        rest.push_back(scores[i]);
      }
    }
    if (scores[t] <= empirical_quantile(rest, risk)) {
      ++covered;
    }
  }
  return {covered, static_cast<std::int64_t>(scores.size())};
}

}  // namespace respcal
