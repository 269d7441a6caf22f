#include "respcal/respcal.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "respcal/calibration.hpp"
#include "respcal/dataset_io.hpp"
#include "respcal/error.hpp"
#include "respcal/metrics.hpp"
#include "respcal/oracle.hpp"
#include "respcal/prediction.hpp"
#include "respcal/simulation.hpp"

using namespace respcal;

struct respcal_dataset {
  std::vector<QARecord> records;
};

struct respcal_oracle {
  OraclePtr oracle;
};

struct respcal_measure {
  MeasurePtr measure;
};

struct respcal_calibration {
  CalibrationResult result;
};

namespace {

thread_local std::string last_error;

respcal_status fail(respcal_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Fn>
respcal_status guarded(Fn&& body) {
  try {
    last_error.clear();
    body();
    return RESPCAL_OK;
  } catch (const Error& e) {
    return fail(static_cast<respcal_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RESPCAL_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(RESPCAL_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(RESPCAL_INTERNAL_ERROR, "unknown error");
  }
}

void require(bool condition, const char* what) {
  if (!condition) {
    throw Error(ErrorCode::kInvalidArgument, what);
  }
}

std::string config_or_empty(const char* config_json) {
  return config_json != nullptr ? config_json : "{}";
}

}  // namespace

extern "C" {

const char* respcal_version(void) { return "1.0.0"; }

const char* respcal_last_error(void) { return last_error.c_str(); }

const char* respcal_status_name(respcal_status status) {
  if (status == RESPCAL_INTERNAL_ERROR) {
    return "InternalError";
  }
  // error_code_name returns views of string literals, so data() is NUL-terminated.
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

respcal_status respcal_dataset_load(const char* path, respcal_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "respcal_dataset_load: null argument");
    auto handle = std::make_unique<respcal_dataset>();
    handle->records = load_dataset(path);
    *out = handle.release();
  });
}

size_t respcal_dataset_size(const respcal_dataset* dataset) {
  return dataset != nullptr ? dataset->records.size() : 0;
}

void respcal_dataset_free(respcal_dataset* dataset) { delete dataset; }

void respcal_remote_options_init(respcal_remote_options* options) {
  if (options != nullptr) {
    options->timeout_seconds = 10.0;
    options->retries = 2;
    options->max_in_flight = 8;
  }
}

respcal_status respcal_oracle_create(const char* selector, const respcal_remote_options* remote,
                                     respcal_oracle** out) {
  return guarded([&] {
    require(selector != nullptr && out != nullptr, "respcal_oracle_create: null argument");
    RemoteOracleOptions options;
    if (remote != nullptr) {
      require(remote->timeout_seconds > 0.0, "remote timeout must be positive");
      options.timeout = std::chrono::milliseconds(
          static_cast<std::int64_t>(std::llround(remote->timeout_seconds * 1000.0)));
      options.retries = remote->retries;
      options.max_in_flight = remote->max_in_flight;
    }
    *out = new respcal_oracle{make_oracle(selector, options)};
  });
}

respcal_status respcal_oracle_create_noisy(const respcal_oracle* base, double flip_prob,
                                           uint64_t seed, respcal_oracle** out) {
  return guarded([&] {
    require(base != nullptr && out != nullptr, "respcal_oracle_create_noisy: null argument");
    *out = new respcal_oracle{noisy_oracle(base->oracle, flip_prob, seed)};
  });
}

respcal_status respcal_oracle_equivalent(const respcal_oracle* oracle, const char* question,
                                         const char* a, const char* b, int* out) {
  return guarded([&] {
    require(oracle != nullptr && question != nullptr && a != nullptr && b != nullptr &&
                out != nullptr,
            "respcal_oracle_equivalent: null argument");
    *out = oracle->oracle->equivalent(question, a, b) ? 1 : 0;
  });
}

void respcal_oracle_free(respcal_oracle* oracle) { delete oracle; }

respcal_status respcal_measure_create(const char* selector, const respcal_oracle* oracle,
                                      respcal_measure** out) {
  return guarded([&] {
    require(selector != nullptr && oracle != nullptr && out != nullptr,
            "respcal_measure_create: null argument");
    *out = new respcal_measure{make_measure(selector, oracle->oracle)};
  });
}

void respcal_measure_free(respcal_measure* measure) { delete measure; }

respcal_status respcal_quantile_rank(size_t n, double risk, size_t* out) {
  return guarded([&] {
    require(out != nullptr, "respcal_quantile_rank: null argument");
    *out = quantile_rank(n, risk);
  });
}

respcal_status respcal_calibrate(const respcal_dataset* calibration_set, double alpha,
                                 double beta, const respcal_oracle* oracle,
                                 const respcal_measure* measure, respcal_calibration** out) {
  return guarded([&] {
    require(calibration_set != nullptr && oracle != nullptr && measure != nullptr &&
                out != nullptr,
            "respcal_calibrate: null argument");
    auto handle = std::make_unique<respcal_calibration>();
    handle->result = calibrate(calibration_set->records, RiskBudget(alpha, beta), *oracle->oracle,
                               *measure->measure);
    *out = handle.release();
  });
}

respcal_status respcal_calibration_load(const char* path, respcal_calibration** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "respcal_calibration_load: null argument");
    std::ifstream in(path);
    if (!in) {
      throw Error(ErrorCode::kIoError, std::string("cannot open calibration file ") + path);
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto handle = std::make_unique<respcal_calibration>();
    handle->result = calibration_from_json(text);
    *out = handle.release();
  });
}

respcal_status respcal_calibration_save(const respcal_calibration* calibration, const char* path) {
  return guarded([&] {
    require(calibration != nullptr && path != nullptr, "respcal_calibration_save: null argument");
    write_file_atomic(path, calibration_to_json(calibration->result) + "\n");
  });
}

int64_t respcal_calibration_sample_budget(const respcal_calibration* c) {
  return c != nullptr ? c->result.sample_budget : 0;
}
double respcal_calibration_threshold(const respcal_calibration* c) {
  return c != nullptr ? c->result.threshold : NAN;
}
double respcal_calibration_alpha(const respcal_calibration* c) {
  return c != nullptr ? c->result.budget.alpha() : NAN;
}
double respcal_calibration_beta(const respcal_calibration* c) {
  return c != nullptr ? c->result.budget.beta() : NAN;
}
double respcal_calibration_epsilon(const respcal_calibration* c) {
  return c != nullptr ? c->result.budget.epsilon() : NAN;
}

void respcal_calibration_free(respcal_calibration* calibration) { delete calibration; }

respcal_status respcal_predict(const respcal_dataset* dataset,
                               const respcal_calibration* calibration,
                               const respcal_oracle* oracle, const respcal_measure* measure,
                               const char* out_path, size_t* n_written) {
  return guarded([&] {
    require(dataset != nullptr && calibration != nullptr && oracle != nullptr &&
                measure != nullptr && out_path != nullptr,
            "respcal_predict: null argument");
    std::string out;
    for (const auto& record : dataset->records) {
      out += prediction_to_json(predict(record, calibration->result, *oracle->oracle,
                                        *measure->measure));
      out += '\n';
    }
    write_file_atomic(out_path, out);
    if (n_written != nullptr) {
      *n_written = dataset->records.size();
    }
  });
}

respcal_status respcal_evaluate(const respcal_dataset* dataset, double alpha, double beta,
                                double split_ratio, uint64_t seed, const respcal_oracle* oracle,
                                const respcal_measure* measure, const char* out_path,
                                const char* config_json, respcal_trial_report* out) {
  return guarded([&] {
    require(dataset != nullptr && oracle != nullptr && measure != nullptr && out != nullptr,
            "respcal_evaluate: null argument");
    const RiskBudget budget(alpha, beta);
    for (const auto& record : dataset->records) {
      validate_record(record, true);
    }
    const auto parts = split(dataset->records, split_ratio, seed);
    const auto calibration = calibrate(parts.calibration, budget, *oracle->oracle,
                                       *measure->measure, Provenance{seed, split_ratio, {}, {}});
    const auto report = evaluate(parts.test, calibration, *oracle->oracle, *measure->measure,
                                 parts.calibration.size());
    if (out_path != nullptr) {
      SweepRow context;
      context.alpha = alpha;
      context.beta = beta;
      context.seed = seed;
      context.split_ratio = split_ratio;
      save_report(report, context, out_path, config_or_empty(config_json));
    }
    *out = respcal_trial_report{report.stage1_eer,     report.stage2_eer,
                                report.apss_raw,       report.apss_dedup,
                                report.acc,            report.n_cal,
                                report.n_test,         calibration.sample_budget,
                                calibration.threshold, budget.alpha(),
                                budget.epsilon()};
  });
}

respcal_status respcal_sweep(const respcal_dataset* dataset, const respcal_oracle* oracle,
                             const respcal_measure* measure, const respcal_sweep_options* options,
                             const char* out_path, const char* config_json,
                             respcal_sweep_summary* out) {
  return guarded([&] {
    require(dataset != nullptr && oracle != nullptr && measure != nullptr && options != nullptr &&
                options->alpha_grid != nullptr && options->beta_grid != nullptr &&
                out_path != nullptr,
            "respcal_sweep: null argument");
    SweepConfig config;
    config.alphas = parse_grid(options->alpha_grid);
    config.betas = parse_grid(options->beta_grid);
    config.split_ratio = options->split_ratio;
    config.seed = options->seed;
    config.trials = options->trials;
    config.workers = options->workers;
    const auto table = sweep(dataset->records, *oracle->oracle, *measure->measure, config);
    save_report(table, out_path, config_or_empty(config_json));
    if (out != nullptr) {
      out->n_rows = table.rows.size();
      out->n_flagged = 0;
      for (const auto& row : table.rows) {
        out->n_flagged += row.ok() ? 0 : 1;
      }
      out->n_grid_points = table.aggregates.size();
    }
  });
}

respcal_status respcal_dedup_report(const respcal_dataset* dataset, const respcal_oracle* oracle,
                                    const respcal_measure* measure, double alpha,
                                    const char* beta_grid, double split_ratio, uint64_t seed,
                                    const char* out_path, const char* config_json,
                                    size_t* n_rows) {
  return guarded([&] {
    require(dataset != nullptr && oracle != nullptr && measure != nullptr &&
                beta_grid != nullptr && out_path != nullptr,
            "respcal_dedup_report: null argument");
    SweepConfig config;
    config.alphas = {alpha};
    config.betas = parse_grid(beta_grid);
    config.split_ratio = split_ratio;
    config.seed = seed;
    config.trials = 1;
    const auto table = sweep(dataset->records, *oracle->oracle, *measure->measure, config);
    write_file_atomic(out_path, dedup_report_csv(table));
    nlohmann::json meta = nlohmann::json::parse(config_or_empty(config_json), nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) {
      throw Error(ErrorCode::kInvalidArgument, "report config must be a JSON object");
    }
    const nlohmann::json sidecar = {{"kind", "dedup-report"},
                                    {"format_version", kFormatVersion},
                                    {"measure", table.measure},
                                    {"oracle", table.oracle},
                                    {"config", meta}};
    write_file_atomic(sidecar_path(out_path), sidecar.dump(2) + "\n");
    if (n_rows != nullptr) {
      *n_rows = table.rows.size();
    }
  });
}

void respcal_simulate_options_init(respcal_simulate_options* o) {
  if (o == nullptr) {
    return;
  }
  o->n_questions = 200;
  o->max_samples = 30;
  o->probability_law = "uniform:0.3:0.9";
  o->distractor_count = 4;
  o->seed = 42;
  o->alpha = 0.1;
  o->beta = 0.1;
  o->split_ratio = 0.5;
  o->trials = 500;
  o->workers = 1;
}

respcal_status respcal_simulate(const respcal_simulate_options* options,
                                const respcal_oracle* oracle, const respcal_measure* measure,
                                const char* out_path, const char* config_json,
                                respcal_verdict* out) {
  return guarded([&] {
    require(options != nullptr && options->probability_law != nullptr && oracle != nullptr &&
                measure != nullptr && out != nullptr,
            "respcal_simulate: null argument");
    SyntheticSpec spec;
    spec.n_questions = options->n_questions;
    spec.max_samples = options->max_samples;
    spec.correct_prob_law = ProbabilityLaw::parse(options->probability_law);
    spec.distractor_count = options->distractor_count;
    spec.seed = options->seed;
    GuaranteeConfig config;
    config.budget = RiskBudget(options->alpha, options->beta);
    config.split_ratio = options->split_ratio;
    config.n_trials = options->trials;
    config.workers = options->workers;
    const auto verdict = validate_guarantee(spec, config, *oracle->oracle, *measure->measure);
    if (out_path != nullptr) {
      SweepTable table;
      table.measure = measure->measure->name();
      table.oracle = oracle->oracle->name();
      table.rows = verdict.rows;
      table.aggregates = aggregate_rows(table.rows);
      save_report(table, out_path, config_or_empty(config_json));
    }
    *out = respcal_verdict{verdict.pass() ? 1 : 0,
                           verdict.stage1_pass ? 1 : 0,
                           verdict.stage2_pass ? 1 : 0,
                           verdict.n_trials,
                           verdict.n_ok,
                           verdict.alpha,
                           verdict.epsilon,
                           verdict.stage1_eer_mean,
                           verdict.stage1_eer_se,
                           verdict.stage2_eer_mean,
                           verdict.stage2_eer_se};
  });
}

size_t respcal_verdict_format(const respcal_verdict* v, char* buffer, size_t capacity) {
  if (v == nullptr) {
    return 0;
  }
  GuaranteeVerdict verdict;
  verdict.alpha = v->alpha;
  verdict.epsilon = v->epsilon;
  verdict.n_trials = v->n_trials;
  verdict.n_ok = v->n_ok;
  verdict.stage1_eer_mean = v->stage1_eer_mean;
  verdict.stage1_eer_se = v->stage1_eer_se;
  verdict.stage2_eer_mean = v->stage2_eer_mean;
  verdict.stage2_eer_se = v->stage2_eer_se;
  verdict.stage1_pass = v->stage1_pass != 0;
  verdict.stage2_pass = v->stage2_pass != 0;
  const std::string text = verdict.summary();
  if (buffer != nullptr && capacity > 0) {
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return text.size();
}

respcal_status respcal_exact_coverage(const double* scores, size_t count, double risk,
                                      int64_t* numerator, int64_t* denominator) {
  return guarded([&] {
    require(scores != nullptr && numerator != nullptr && denominator != nullptr,
            "respcal_exact_coverage: null argument");
    std::vector<ScoreValue> values;
    values.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      const double s = scores[i];
      if (std::isinf(s) && s > 0) {
        values.push_back(ScoreValue::infinite());
      } else if (s >= 0.0 && s <= 1.0) {
        values.push_back(ScoreValue::unit(s));
      } else if (s >= 1.0 && std::floor(s) == s) {
        values.push_back(ScoreValue::rank(static_cast<std::int64_t>(s)));
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "scores must be in [0,1], integers >= 1, or +INFINITY");
      }
    }
    const auto r = exact_coverage_small(values, risk);
    *numerator = r.num;
    *denominator = r.den;
  });
}

}  // extern "C"
