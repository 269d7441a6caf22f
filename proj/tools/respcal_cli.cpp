// respcal command-line interface. Links only against the C API in respcal.h.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "respcal/respcal.h"

namespace {

struct Flags {
  std::string data;
  std::string calibration;
  std::string alpha = "0.1";
  std::string beta = "0.1";
  std::string epsilon;
  double split_ratio = 0.5;
  std::uint64_t seed = 42;
  std::size_t trials = 1;
  std::string oracle = "exact";
  std::string measure = "frequency";
  std::size_t workers = 1;
  std::string out;
  double timeout = 10.0;
  int retries = 2;
  int max_in_flight = 8;
  // simulate
  std::size_t n_questions = 200;
  std::size_t max_samples = 30;
  std::string p_law = "uniform:0.3:0.9";
  std::size_t distractors = 4;
  double noise = 0.0;
};

// Non-zero exit carrying the library status.
struct Failure {
  respcal_status status;
  std::string context;
};

void check(respcal_status status, const std::string& context) {
  if (status != RESPCAL_OK) {
    throw Failure{status, context};
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<respcal_dataset, Deleter<respcal_dataset, respcal_dataset_free>>;
using Oracle = std::unique_ptr<respcal_oracle, Deleter<respcal_oracle, respcal_oracle_free>>;
using Measure = std::unique_ptr<respcal_measure, Deleter<respcal_measure, respcal_measure_free>>;
using Calibration =
    std::unique_ptr<respcal_calibration, Deleter<respcal_calibration, respcal_calibration_free>>;

double single_value(const std::string& text, const char* flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw CLI::ValidationError(flag, "expected a single number, got '" + text + "'");
  }
  return v;
}

Dataset load(const Flags& f) {
  if (f.data.empty()) {
    throw CLI::RequiredError("--data");
  }
  respcal_dataset* raw = nullptr;
  check(respcal_dataset_load(f.data.c_str(), &raw), "loading " + f.data);
  return Dataset(raw);
}

Oracle make_oracle(const Flags& f) {
  respcal_remote_options remote;
  respcal_remote_options_init(&remote);
  remote.timeout_seconds = f.timeout;
  remote.retries = f.retries;
  remote.max_in_flight = f.max_in_flight;
  respcal_oracle* raw = nullptr;
  check(respcal_oracle_create(f.oracle.c_str(), &remote, &raw), "oracle '" + f.oracle + "'");
  Oracle oracle(raw);
  if (f.noise > 0.0) {
    respcal_oracle* noisy = nullptr;
    check(respcal_oracle_create_noisy(oracle.get(), f.noise, f.seed, &noisy), "noisy oracle");
    oracle.reset(noisy);
  }
  return oracle;
}

Measure make_measure(const Flags& f, const respcal_oracle* oracle) {
  respcal_measure* raw = nullptr;
  check(respcal_measure_create(f.measure.c_str(), oracle, &raw), "measure '" + f.measure + "'");
  return Measure(raw);
}

std::string config_json(const std::string& command, const Flags& f) {
  const nlohmann::json doc = {{"command", command},
                              {"data", f.data},
                              {"alpha", f.alpha},
                              {"beta", f.beta},
                              {"epsilon", f.epsilon},
                              {"split_ratio", f.split_ratio},
                              {"seed", f.seed},
                              {"trials", f.trials},
                              {"oracle", f.oracle},
                              {"measure", f.measure},
                              {"workers", f.workers},
                              {"noise", f.noise}};
  return doc.dump();
}

int cmd_calibrate(const Flags& f) {
  auto data = load(f);
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  respcal_calibration* raw = nullptr;
  check(respcal_calibrate(data.get(), single_value(f.alpha, "--alpha"),
                          single_value(f.beta, "--beta"), oracle.get(), measure.get(), &raw),
        "calibrating on " + f.data);
  Calibration cal(raw);
  if (!f.out.empty()) {
    check(respcal_calibration_save(cal.get(), f.out.c_str()), "writing " + f.out);
  }
  std::printf("r_hat=%lld s_hat=%.6g alpha=%g beta=%g epsilon=%g n=%zu\n",
              static_cast<long long>(respcal_calibration_sample_budget(cal.get())),
              respcal_calibration_threshold(cal.get()), respcal_calibration_alpha(cal.get()),
              respcal_calibration_beta(cal.get()), respcal_calibration_epsilon(cal.get()),
              respcal_dataset_size(data.get()));
  return 0;
}

int cmd_predict(const Flags& f) {
  if (f.calibration.empty()) {
    throw CLI::RequiredError("--calibration");
  }
  if (f.out.empty()) {
    throw CLI::RequiredError("--out");
  }
  auto data = load(f);
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  respcal_calibration* raw = nullptr;
  check(respcal_calibration_load(f.calibration.c_str(), &raw), "reading " + f.calibration);
  Calibration cal(raw);
  std::size_t n = 0;
  check(respcal_predict(data.get(), cal.get(), oracle.get(), measure.get(), f.out.c_str(), &n),
        "predicting " + f.data);
  std::printf("wrote %zu prediction sets to %s\n", n, f.out.c_str());
  return 0;
}

int cmd_evaluate(const Flags& f) {
  auto data = load(f);
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  respcal_trial_report r{};
  const auto config = config_json("evaluate", f);
  check(respcal_evaluate(data.get(), single_value(f.alpha, "--alpha"),
                         single_value(f.beta, "--beta"), f.split_ratio, f.seed, oracle.get(),
                         measure.get(), f.out.empty() ? nullptr : f.out.c_str(), config.c_str(),
                         &r),
        "evaluating " + f.data);
  std::printf(
      "n_cal=%zu n_test=%zu r_hat=%lld s_hat=%.6g\n"
      "stage1_eer=%.4f (bound alpha=%g)\nstage2_eer=%.4f (bound epsilon=%g)\n"
      "apss_raw=%.4f apss_dedup=%.4f acc=%.4f\n",
      r.n_cal, r.n_test, static_cast<long long>(r.sample_budget), r.threshold, r.stage1_eer,
      r.alpha, r.stage2_eer, r.epsilon, r.apss_raw, r.apss_dedup, r.acc);
  return 0;
}

int cmd_sweep(const Flags& f) {
  if (f.out.empty()) {
    throw CLI::RequiredError("--out");
  }
  auto data = load(f);
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  respcal_sweep_options options{f.alpha.c_str(), f.beta.c_str(), f.split_ratio,
                                f.seed,          f.trials,       f.workers};
  respcal_sweep_summary summary{};
  const auto config = config_json("sweep", f);
  check(respcal_sweep(data.get(), oracle.get(), measure.get(), &options, f.out.c_str(),
                      config.c_str(), &summary),
        "sweeping " + f.data);
  std::printf("wrote %zu rows over %zu grid points to %s (%zu flagged infeasible)\n",
              summary.n_rows, summary.n_grid_points, f.out.c_str(), summary.n_flagged);
  return 0;
}

int cmd_simulate(const Flags& f) {
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  respcal_simulate_options o;
  respcal_simulate_options_init(&o);
  o.n_questions = f.n_questions;
  o.max_samples = f.max_samples;
  o.probability_law = f.p_law.c_str();
  o.distractor_count = f.distractors;
  o.seed = f.seed;
  o.alpha = single_value(f.alpha, "--alpha");
  o.beta = single_value(f.beta, "--beta");
  o.split_ratio = f.split_ratio;
  o.trials = f.trials;
  o.workers = f.workers;
  respcal_verdict verdict{};
  const auto config = config_json("simulate", f);
  check(respcal_simulate(&o, oracle.get(), measure.get(), f.out.empty() ? nullptr : f.out.c_str(),
                         config.c_str(), &verdict),
        "simulating");
  std::string text(respcal_verdict_format(&verdict, nullptr, 0) + 1, '\0');
  respcal_verdict_format(&verdict, text.data(), text.size());
  text.pop_back();
  std::fputs(text.c_str(), stdout);
  return verdict.pass ? 0 : 2;
}

int cmd_dedup_report(const Flags& f) {
  if (f.out.empty()) {
    throw CLI::RequiredError("--out");
  }
  auto data = load(f);
  auto oracle = make_oracle(f);
  auto measure = make_measure(f, oracle.get());
  const double alpha = single_value(f.alpha, "--alpha");
  std::string betas = f.beta;
  if (!f.epsilon.empty()) {
    // epsilon = alpha + beta - alpha * beta  =>  beta = (epsilon - alpha) / (1 - alpha)
    betas.clear();
    std::size_t start = 0;
    while (start <= f.epsilon.size()) {
      const auto end = std::min(f.epsilon.find(',', start), f.epsilon.size());
      const double eps = single_value(f.epsilon.substr(start, end - start), "--epsilon");
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", (eps - alpha) / (1.0 - alpha));
      betas += (betas.empty() ? "" : ",") + std::string(buf);
      start = end + 1;
    }
  }
  std::size_t rows = 0;
  const auto config = config_json("dedup-report", f);
  check(respcal_dedup_report(data.get(), oracle.get(), measure.get(), alpha, betas.c_str(),
                             f.split_ratio, f.seed, f.out.c_str(), config.c_str(), &rows),
        "dedup report on " + f.data);
  std::printf("wrote %zu rows to %s\n", rows, f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage conformal risk control over sampled responses"};
  app.set_version_flag("--version", std::string(respcal_version()));
  app.set_config("--config", "", "TOML/INI file pre-filling any flag (flags win)");
  app.require_subcommand(1);

  Flags f;
  auto env = [](CLI::Option* opt, const char* name) { opt->envname(std::string("RESPCAL_") + name); };
  env(app.add_option("--data", f.data, "Line-delimited JSON dataset"), "DATA");
  env(app.add_option("--calibration", f.calibration, "Calibration JSON (predict)"), "CALIBRATION");
  env(app.add_option("--alpha", f.alpha, "Stage-1 risk level (grid start:stop:step for sweep)")
          ->capture_default_str(),
      "ALPHA");
  env(app.add_option("--beta", f.beta, "Stage-2 risk level (grid for sweep / dedup-report)")
          ->capture_default_str(),
      "BETA");
  env(app.add_option("--epsilon", f.epsilon, "dedup-report: comma list of overall risk levels"),
      "EPSILON");
  env(app.add_option("--split-ratio", f.split_ratio, "Calibration fraction")
          ->check(CLI::Range(0.0, 1.0))
          ->capture_default_str(),
      "SPLIT_RATIO");
  env(app.add_option("--seed", f.seed)->capture_default_str(), "SEED");
  env(app.add_option("--trials", f.trials)->check(CLI::PositiveNumber)->capture_default_str(),
      "TRIALS");
  env(app.add_option("--oracle", f.oracle, "exact | normalized | remote:<URL>")
          ->capture_default_str(),
      "ORACLE");
  env(app.add_option("--measure", f.measure,
                     "frequency | semantic-diversity | semantic-diversity:lexical")
          ->capture_default_str(),
      "MEASURE");
  env(app.add_option("--workers", f.workers)->check(CLI::PositiveNumber)->capture_default_str(),
      "WORKERS");
  env(app.add_option("--out", f.out, "Output path"), "OUT");
  env(app.add_option("--timeout", f.timeout, "Remote oracle timeout (s)")->capture_default_str(),
      "TIMEOUT");
  env(app.add_option("--retries", f.retries, "Remote oracle retries")->capture_default_str(),
      "RETRIES");
  env(app.add_option("--max-in-flight", f.max_in_flight, "Remote oracle concurrency cap")
          ->capture_default_str(),
      "MAX_IN_FLIGHT");
  env(app.add_option("--n-questions", f.n_questions, "simulate: questions per trial")
          ->capture_default_str(),
      "N_QUESTIONS");
  env(app.add_option("--max-samples", f.max_samples, "simulate: samples per question")
          ->capture_default_str(),
      "MAX_SAMPLES");
  env(app.add_option("--p-law", f.p_law, "simulate: fixed:P | uniform:LO:HI | twopoint:P1:P2:W")
          ->capture_default_str(),
      "P_LAW");
  env(app.add_option("--distractors", f.distractors, "simulate: wrong answers per question")
          ->capture_default_str(),
      "DISTRACTORS");
  env(app.add_option("--noise", f.noise, "Flip probability for a noisy oracle wrapper")
          ->check(CLI::Range(0.0, 1.0)),
      "NOISE");

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const std::vector<Command> commands = {
      {"calibrate", "Calibrate r-hat and s-hat on a labeled dataset", cmd_calibrate},
      {"predict", "Build prediction sets from a calibration file", cmd_predict},
      {"evaluate", "Split, calibrate and report EER/APSS/ACC", cmd_evaluate},
      {"sweep", "Risk-level grid sweep to CSV", cmd_sweep},
      {"simulate", "Monte Carlo check of the coverage guarantees", cmd_simulate},
      {"dedup-report", "Raw vs deduplicated APSS across risk levels", cmd_dedup_report},
  };
  for (const auto& c : commands) {
    app.add_subcommand(c.name, c.help)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) {
        return c.run(f);
      }
    }
  } catch (const Failure& failure) {
    std::fprintf(stderr, "error: %s: %s: %s\n", respcal_status_name(failure.status),
                 failure.context.c_str(), respcal_last_error());
    return static_cast<int>(failure.status);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return 1;
}
