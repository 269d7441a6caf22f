#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "respcal/metrics.hpp"
#include "respcal/simulation.hpp"
#include "respcal/types.hpp"

namespace respcal {

inline constexpr int kFormatVersion = 1;

/// One JSON object per line: {"id", "question", "reference": string|null,
/// "samples": [...], "format_version"?}. Blank lines are skipped. Labels are
/// not required here; calibration and evaluation reject unlabeled records.
std::vector<QARecord> load_dataset(const std::filesystem::path& path);
std::vector<QARecord> parse_dataset(std::istream& in);

void save_dataset(std::span<const QARecord> records, const std::filesystem::path& path);

struct Split {
  std::vector<QARecord> calibration;
  std::vector<QARecord> test;
};

/// Seeded uniform shuffle; the first floor(ratio * N) records calibrate.
Split split(std::span<const QARecord> records, double ratio, std::uint64_t seed);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// `path` with its extension replaced by ".json".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

std::string sweep_csv_header();
std::string sweep_csv(const SweepTable& table);
std::string aggregate_csv(const SweepTable& table);

/// CSV at `path` (metrics schema), aggregates at "<stem>.agg.csv", JSON sidecar
/// with `config` merged into the provenance block.
void save_report(const SweepTable& table, const std::filesystem::path& path,
                 const std::string& config_json = "{}");
void save_report(const TrialReport& report, const SweepRow& context,
                 const std::filesystem::path& path, const std::string& config_json = "{}");

/// Raw-vs-dedup APSS per grid point of a single-trial sweep:
/// alpha,beta,epsilon,r_hat,s_hat,apss_raw,apss_dedup,stage2_eer,n_test,status
std::string dedup_report_csv(const SweepTable& table);

std::string calibration_to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(const std::string& text);

/// {"id", "raw": [{"sample", "text", "reliability"}...], "dedup": [...],
///  "raw_size", "dedup_size"}
std::string prediction_to_json(const PredictionSet& set);

}  // namespace respcal
