#include "respcal/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "parallel.hpp"
#include "respcal/clustering.hpp"
#include "respcal/dataset_io.hpp"
#include "respcal/error.hpp"
#include "respcal/prediction.hpp"
#include "respcal/rng.hpp"

namespace respcal {
namespace {

bool any_acceptable(const QARecord& record, std::size_t limit, const EquivalenceOracle& oracle) {
  for (std::size_t m = 0; m < limit; ++m) {
    if (oracle.equivalent(record.question, record.samples[m], *record.reference)) {
      return true;
    }
  }
  return false;
}

double fraction(std::size_t hits, std::size_t total) {
  if (total == 0) {
    throw Error(ErrorCode::kEmptyCollection, "metric over an empty test set");
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) {
    return out;
  }
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) {
      ss += (x - out.mean) * (x - out.mean);
    }
    const double n = static_cast<double>(xs.size());
    out.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

}  // namespace

double stage1_eer(std::span<const QARecord> test, std::int64_t sample_budget,
                  const EquivalenceOracle& oracle) {
  std::size_t misses = 0;
  for (const auto& record : test) {
    validate_record(record, true);
    if (sample_budget < 1 || record.samples.size() < static_cast<std::size_t>(sample_budget)) {
      throw Error(ErrorCode::kInsufficientSamples,
                  "record '" + record.id + "' has fewer than " + std::to_string(sample_budget) +
                      " samples");
    }
    if (!any_acceptable(record, static_cast<std::size_t>(sample_budget), oracle)) {
      ++misses;
    }
  }
  return fraction(misses, test.size());
}

double stage2_eer(std::span<const QARecord> test, std::span<const PredictionSet> sets,
                  const EquivalenceOracle& oracle) {
  if (test.size() != sets.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one prediction set per test record is required");
  }
  std::size_t misses = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& record = validate_record(test[i], true);
    bool covered = false;
    for (const auto& member : sets[i].raw_members) {
      if (oracle.equivalent(record.question, member.text, *record.reference)) {
        covered = true;
        break;
      }
    }
    misses += covered ? 0 : 1;
  }
  return fraction(misses, test.size());
}

double apss(std::span<const PredictionSet> sets, SetView view) {
  if (sets.empty()) {
    throw Error(ErrorCode::kEmptyCollection, "APSS over no prediction sets");
  }
  std::size_t total = 0;
  for (const auto& set : sets) {
    total += view == SetView::kRaw ? set.raw_members.size() : set.dedup_members.size();
  }
  return static_cast<double>(total) / static_cast<double>(sets.size());
}

double acc(std::span<const QARecord> test, const EquivalenceOracle& oracle) {
  std::size_t hits = 0;
  for (const auto& record : test) {
    validate_record(record, true);
    const auto assignment = cluster(record, oracle);
    std::size_t modal = 0;
    for (std::size_t m = 1; m < assignment.prefix_len(); ++m) {
      if (assignment.counts[m] > assignment.counts[modal]) {
        modal = m;
      }
    }
    if (oracle.equivalent(record.question, record.samples[modal], *record.reference)) {
      ++hits;
    }
  }
  return fraction(hits, test.size());
}

TrialReport evaluate(std::span<const QARecord> test, const CalibrationResult& calibration,
                     const EquivalenceOracle& oracle, const ReliabilityMeasure& measure,
                     std::size_t n_cal) {
  std::vector<PredictionSet> sets;
  sets.reserve(test.size());
  for (const auto& record : test) {
    sets.push_back(predict(record, calibration, oracle, measure));
  }
  TrialReport report;
  report.stage1_eer = stage1_eer(test, calibration.sample_budget, oracle);
  report.stage2_eer = stage2_eer(test, sets, oracle);
  report.apss_raw = apss(sets, SetView::kRaw);
  report.apss_dedup = apss(sets, SetView::kDedup);
  report.acc = acc(test, oracle);
  report.n_cal = n_cal;
  report.n_test = test.size();
  report.calibration = calibration;
  return report;
}

SweepTable sweep(std::span<const QARecord> records, const EquivalenceOracle& oracle,
                 const ReliabilityMeasure& measure, const SweepConfig& config) {
  if (config.alphas.empty() || config.betas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep grids must be non-empty");
  }
  if (config.trials == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one trial");
  }
  for (const auto& record : records) {
    validate_record(record, true);
  }

  std::vector<std::pair<double, double>> grid;
  for (double a : config.alphas) {
    for (double b : config.betas) {
      RiskBudget(a, b);  // validates the range
      grid.emplace_back(a, b);
    }
  }

  SweepTable table;
  table.measure = measure.name();
  table.oracle = oracle.name();
  table.rows.resize(grid.size() * config.trials);

  detail::parallel_for(table.rows.size(), config.workers, [&](std::size_t task) {
    const std::size_t g = task / config.trials;
    const std::size_t t = task % config.trials;
    SweepRow row;
    row.alpha = grid[g].first;
    row.beta = grid[g].second;
    row.trial = t;
    row.seed = derive_seed(config.seed, t);
    row.split_ratio = config.split_ratio;

    const auto parts = split(records, config.split_ratio, row.seed);
    try {
      Provenance provenance{row.seed, row.split_ratio, {}, {}};
      const auto calibration = calibrate(parts.calibration, RiskBudget(row.alpha, row.beta),
                                         oracle, measure, provenance);
      row.report = evaluate(parts.test, calibration, oracle, measure, parts.calibration.size());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleRiskLevel && e.code() != ErrorCode::kUnboundedBudget) {
        throw;
      }
      row.status = std::string(error_code_name(e.code()));
      row.report.n_cal = parts.calibration.size();
      row.report.n_test = parts.test.size();
    }
    table.rows[task] = std::move(row);
  });

  table.aggregates = aggregate_rows(table.rows);
  return table;
}

std::vector<SweepAggregate> aggregate_rows(std::span<const SweepRow> rows) {
  using Key = std::tuple<double, double, double>;
  std::map<Key, std::size_t> index;
  std::vector<SweepAggregate> out;
  std::vector<std::vector<const SweepRow*>> members;
  for (const auto& row : rows) {
    const Key key{row.alpha, row.beta, row.split_ratio};
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      SweepAggregate agg;
      agg.alpha = row.alpha;
      agg.beta = row.beta;
      agg.split_ratio = row.split_ratio;
      out.push_back(agg);
      members.emplace_back();
    }
    members[it->second].push_back(&row);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& agg = out[i];
    std::vector<double> s1, s2, raw, dd, ac;
    for (const SweepRow* row : members[i]) {
      ++agg.n_trials;
      if (!row->ok()) {
        continue;
      }
      ++agg.n_ok;
      s1.push_back(row->report.stage1_eer);
      s2.push_back(row->report.stage2_eer);
      raw.push_back(row->report.apss_raw);
      dd.push_back(row->report.apss_dedup);
      ac.push_back(row->report.acc);
    }
    auto fill = [](double& mean, double& se, const std::vector<double>& xs) {
      const auto r = mean_se(xs);
      mean = r.mean;
      se = r.se;
    };
    fill(agg.stage1_eer_mean, agg.stage1_eer_se, s1);
    fill(agg.stage2_eer_mean, agg.stage2_eer_se, s2);
    fill(agg.apss_raw_mean, agg.apss_raw_se, raw);
    fill(agg.apss_dedup_mean, agg.apss_dedup_se, dd);
    fill(agg.acc_mean, agg.acc_se, ac);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  auto bad = [&] {
    return Error(ErrorCode::kInvalidArgument,
                 "bad grid '" + text + "' (expected start:stop:step, a value, or a comma list)");
  };
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used != s.size()) {
      throw bad();
    }
    return v;
  };

  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    std::vector<std::string> parts;
    std::stringstream fields(item);
    std::string field;
    while (std::getline(fields, field, ':')) {
      parts.push_back(field);
    }
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0]));
    } else if (parts.size() == 3) {
      const double start = to_double(parts[0]);
      const double stop = to_double(parts[1]);
      const double step = to_double(parts[2]);
      if (!(step > 0.0) || stop < start) {
        throw bad();
      }
      const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (std::size_t i = 0; i < count; ++i) {
        // snap to 12 decimals so 0.1:0.5:0.1 yields 0.3, not 0.30000000000000004
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
      }
    } else {
      throw bad();
    }
  }
  if (out.empty()) {
    throw bad();
  }
  return out;
}

}  // namespace respcal
