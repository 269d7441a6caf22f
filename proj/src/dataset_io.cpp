#include "respcal/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "respcal/error.hpp"
#include "respcal/rng.hpp"

namespace respcal {
namespace {

using nlohmann::json;

QARecord record_from_json(const json& doc, std::size_t line) {
  if (!doc.is_object()) {
    throw ParseError(line, "record is not a JSON object");
  }
  auto require_string = [&](const char* key) -> std::string {
    if (!doc.contains(key) || !doc[key].is_string()) {
      throw ParseError(line, std::string("field \"") + key + "\" must be a string");
    }
    return doc[key].get<std::string>();
  };
  QARecord record;
  record.id = require_string("id");
  record.question = require_string("question");
  if (doc.contains("reference") && !doc["reference"].is_null()) {
    if (!doc["reference"].is_string()) {
      throw ParseError(line, "field \"reference\" must be a string or null");
    }
    record.reference = doc["reference"].get<std::string>();
  }
  if (!doc.contains("samples") || !doc["samples"].is_array()) {
    throw ParseError(line, "field \"samples\" must be an array");
  }
  for (const auto& s : doc["samples"]) {
    if (!s.is_string()) {
      throw ParseError(line, "every sample must be a string");
    }
    record.samples.push_back(s.get<std::string>());
  }
  if (doc.contains("format_version")) {
    const auto& v = doc["format_version"];
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
      throw ParseError(line, "unsupported format_version");
    }
  }
  return record;
}

json record_to_json(const QARecord& record) {
  json doc = {{"id", record.id}, {"question", record.question}};
  doc["reference"] = record.reference ? json(*record.reference) : json(nullptr);
  doc["samples"] = record.samples;
  return doc;
}

// Shortest representation that round-trips.
std::string num(double v) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  return out + "\"";
}

void append_row(std::ostringstream& os, const SweepRow& row, const std::string& measure,
                const std::string& oracle) {
  const auto& r = row.report;
  os << num(row.alpha) << ',' << num(row.beta) << ',' << num(row.epsilon()) << ',' << row.trial
     << ',' << row.seed << ',' << num(row.split_ratio) << ',';
  if (row.ok()) {
    os << num(r.stage1_eer) << ',' << num(r.stage2_eer) << ',' << num(r.apss_raw) << ','
       << num(r.apss_dedup) << ',' << num(r.acc) << ',';
  } else {
    os << ",,,,,";
  }
  os << r.n_cal << ',' << r.n_test << ',';
  if (row.ok()) {
    os << r.calibration.sample_budget << ',' << num(r.calibration.threshold);
  } else {
    os << ',';
  }
  os << ',' << csv_field(measure) << ',' << csv_field(oracle) << ',' << row.status << '\n';
}

json provenance_json(const Provenance& p) {
  return {{"seed", p.seed}, {"split_ratio", p.split_ratio}, {"measure", p.measure},
          {"oracle", p.oracle}};
}

json sidecar(const std::string& config_json, json body) {
  json config = json::parse(config_json, nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "report config must be a JSON object");
  }
  body["format_version"] = kFormatVersion;
  body["config"] = std::move(config);
  return body;
}

std::filesystem::path with_suffix(const std::filesystem::path& path, const std::string& suffix) {
  auto out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

}  // namespace

std::vector<QARecord> parse_dataset(std::istream& in) {
  std::vector<QARecord> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    auto record = record_from_json(doc, line_no);
    if (!ids.insert(record.id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "line " + std::to_string(line_no) + ": duplicate id '" + record.id + "'");
    }
    validate_record(record, false);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<QARecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open dataset " + path.string());
  }
  return parse_dataset(in);
}

void save_dataset(std::span<const QARecord> records, const std::filesystem::path& path) {
  std::string out;
  for (const auto& record : records) {
    out += record_to_json(record).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

Split split(std::span<const QARecord> records, double ratio, std::uint64_t seed) {
  if (records.size() < 2) {
    throw Error(ErrorCode::kTooFewRecords, "a split needs at least 2 records");
  }
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split ratio must lie in (0,1)");
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  Rng rng(seed);
  rng.shuffle(std::span(order));
  // floor with a small guard so 0.3 * 1000 is 300, not 299
  const auto n_cal = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(records.size()) + 1e-9));
  if (n_cal == 0 || n_cal == records.size()) {
    throw Error(ErrorCode::kTooFewRecords, "split ratio " + std::to_string(ratio) + " of " +
                                               std::to_string(records.size()) +
                                               " records leaves one side empty");
  }
  Split out;
  out.calibration.reserve(n_cal);
  out.test.reserve(records.size() - n_cal);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_cal ? out.calibration : out.test).push_back(records[order[i]]);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    }
    out << contents;
    out.flush();
    if (!out) {
      throw Error(ErrorCode::kIoError, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot replace " + path.string());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return with_suffix(path, ".json");
}

std::string sweep_csv_header() {
  return "alpha,beta,epsilon,trial,seed,split_ratio,stage1_eer,stage2_eer,apss_raw,apss_dedup,"
         "acc,n_cal,n_test,r_hat,s_hat,measure,oracle,status";
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream os;
  os << sweep_csv_header() << '\n';
  for (const auto& row : table.rows) {
    append_row(os, row, table.measure, table.oracle);
  }
  return os.str();
}

std::string aggregate_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "alpha,beta,epsilon,split_ratio,n_trials,n_ok,stage1_eer_mean,stage1_eer_se,"
        "stage2_eer_mean,stage2_eer_se,apss_raw_mean,apss_raw_se,apss_dedup_mean,"
        "apss_dedup_se,acc_mean,acc_se,measure,oracle\n";
  for (const auto& a : table.aggregates) {
    os << num(a.alpha) << ',' << num(a.beta) << ',' << num(a.epsilon()) << ','
       << num(a.split_ratio) << ',' << a.n_trials << ',' << a.n_ok << ','
       << num(a.stage1_eer_mean) << ',' << num(a.stage1_eer_se) << ','
       << num(a.stage2_eer_mean) << ',' << num(a.stage2_eer_se) << ','
       << num(a.apss_raw_mean) << ',' << num(a.apss_raw_se) << ','
       << num(a.apss_dedup_mean) << ',' << num(a.apss_dedup_se) << ',' << num(a.acc_mean)
       << ',' << num(a.acc_se) << ',' << csv_field(table.measure) << ','
       << csv_field(table.oracle) << '\n';
  }
  return os.str();
}

void save_report(const SweepTable& table, const std::filesystem::path& path,
                 const std::string& config_json) {
  const auto agg_path = with_suffix(path, ".agg.csv");
  json body = {{"kind", "sweep"},
               {"rows", table.rows.size()},
               {"aggregates", table.aggregates.size()},
               {"measure", table.measure},
               {"oracle", table.oracle},
               {"csv", path.filename().string()},
               {"aggregate_csv", agg_path.filename().string()}};
  const auto meta = sidecar(config_json, std::move(body)).dump(2);
  write_file_atomic(path, sweep_csv(table));
  write_file_atomic(agg_path, aggregate_csv(table));
  write_file_atomic(sidecar_path(path), meta + "\n");
}

void save_report(const TrialReport& report, const SweepRow& context,
                 const std::filesystem::path& path, const std::string& config_json) {
  SweepTable table;
  table.measure = report.calibration.provenance.measure;
  table.oracle = report.calibration.provenance.oracle;
  SweepRow row = context;
  row.report = report;
  table.rows.push_back(row);
  table.aggregates = aggregate_rows(table.rows);

  json body = {{"kind", "trial"},
               {"calibration", json::parse(calibration_to_json(report.calibration))},
               {"stage1_eer", report.stage1_eer},
               {"stage2_eer", report.stage2_eer},
               {"apss_raw", report.apss_raw},
               {"apss_dedup", report.apss_dedup},
               {"acc", report.acc},
               {"n_cal", report.n_cal},
               {"n_test", report.n_test},
               {"csv", path.filename().string()}};
  const auto meta = sidecar(config_json, std::move(body)).dump(2);
  write_file_atomic(path, sweep_csv(table));
  write_file_atomic(sidecar_path(path), meta + "\n");
}

std::string dedup_report_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "alpha,beta,epsilon,r_hat,s_hat,apss_raw,apss_dedup,stage2_eer,n_test,status\n";
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    os << num(row.alpha) << ',' << num(row.beta) << ',' << num(row.epsilon()) << ',';
    if (row.ok()) {
      os << r.calibration.sample_budget << ',' << num(r.calibration.threshold) << ','
         << num(r.apss_raw) << ',' << num(r.apss_dedup) << ',' << num(r.stage2_eer);
    } else {
      os << ",,,,";
    }
    os << ',' << r.n_test << ',' << row.status << '\n';
  }
  return os.str();
}

std::string calibration_to_json(const CalibrationResult& result) {
  json doc = {{"format_version", kFormatVersion},
              {"sample_budget", result.sample_budget},
              {"threshold", result.threshold},
              {"alpha", result.budget.alpha()},
              {"beta", result.budget.beta()},
              {"epsilon", result.budget.epsilon()},
              {"calibration_size", result.calibration_size},
              {"provenance", provenance_json(result.provenance)}};
  return doc.dump(2);
}

CalibrationResult calibration_from_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kParseError, "calibration file is not a JSON object");
  }
  try {
    CalibrationResult result;
    result.sample_budget = doc.at("sample_budget").get<std::int64_t>();
    result.threshold = doc.at("threshold").get<double>();
    result.budget = RiskBudget(doc.at("alpha").get<double>(), doc.at("beta").get<double>());
    result.calibration_size = doc.at("calibration_size").get<std::size_t>();
    if (doc.contains("provenance")) {
      const auto& p = doc["provenance"];
      result.provenance.seed = p.value("seed", std::uint64_t{0});
      result.provenance.split_ratio = p.value("split_ratio", 1.0);
      result.provenance.measure = p.value("measure", std::string{});
      result.provenance.oracle = p.value("oracle", std::string{});
    }
    if (result.sample_budget < 1 || !(result.threshold >= 0.0 && result.threshold <= 1.0)) {
      throw Error(ErrorCode::kParseError, "calibration values out of range");
    }
    return result;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("calibration file: ") + e.what());
  }
}

std::string prediction_to_json(const PredictionSet& set) {
  auto members = [](const std::vector<SetMember>& list) {
    json out = json::array();
    for (const auto& m : list) {
      out.push_back({{"sample", m.sample}, {"text", m.text}, {"reliability", m.reliability}});
    }
    return out;
  };
  json doc = {{"id", set.record_id},
              {"raw", members(set.raw_members)},
              {"dedup", members(set.dedup_members)},
              {"raw_size", set.raw_members.size()},
              {"dedup_size", set.dedup_members.size()}};
  return doc.dump();
}

}  // namespace respcal
