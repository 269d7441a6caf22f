#include "respcal/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <semaphore>
#include <set>
#include <string>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "respcal/error.hpp"

namespace respcal {
namespace {

class ExactOracle final : public EquivalenceOracle {
 public:
  bool entails(std::string_view, std::string_view premise,
               std::string_view hypothesis) const override {
    return premise == hypothesis;
  }
  bool equivalent(std::string_view, std::string_view a, std::string_view b) const override {
    return a == b;
  }
  std::string name() const override { return "exact"; }
};

class NormalizedOracle final : public EquivalenceOracle {
 public:
  bool entails(std::string_view, std::string_view premise,
               std::string_view hypothesis) const override {
    return normalize_response(premise) == normalize_response(hypothesis);
  }
  bool equivalent(std::string_view q, std::string_view a, std::string_view b) const override {
    return entails(q, a, b);
  }
  std::string name() const override { return "normalized"; }
};

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // field separator so ("ab","c") and ("a","bc") differ
  h ^= 0xff;
  h *= 0x100000001b3ULL;
  return h;
}

class NoisyOracle final : public EquivalenceOracle {
 public:
  NoisyOracle(OraclePtr base, double flip_prob, std::uint64_t seed)
      : base_(std::move(base)), flip_prob_(flip_prob), seed_(seed) {}

  // Symmetric in (premise, hypothesis), so equivalent == entails both ways.
  bool entails(std::string_view q, std::string_view premise,
               std::string_view hypothesis) const override {
    return equivalent(q, premise, hypothesis);
  }

  bool equivalent(std::string_view q, std::string_view a, std::string_view b) const override {
    const bool truth = base_->equivalent(q, a, b);
    if (a == b) {
      return truth;
    }
    const auto [lo, hi] = std::minmax(a, b);
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed_;
    h = fnv1a(fnv1a(fnv1a(h, q), lo), hi);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < flip_prob_ ? !truth : truth;
  }

  std::string name() const override { return "noisy(" + base_->name() + ")"; }

 private:
  OraclePtr base_;
  double flip_prob_;
  std::uint64_t seed_;
};

class RemoteOracle final : public EquivalenceOracle {
 public:
  explicit RemoteOracle(RemoteOracleOptions options)
      : options_(std::move(options)), slots_(std::max(1, options_.max_in_flight)) {
    const auto& url = options_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
      throw Error(ErrorCode::kInvalidArgument, "remote oracle endpoint must be http://host[:port]/path");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (options_.max_in_flight < 1 || options_.max_in_flight > kMaxInFlight) {
      throw Error(ErrorCode::kInvalidArgument, "remote oracle concurrency cap out of range");
    }
  }

  bool entails(std::string_view question, std::string_view premise,
               std::string_view hypothesis) const override {
    const nlohmann::json body = {{"question", question},
                                 {"premise", premise},
                                 {"hypothesis", hypothesis}};
    const std::string payload = body.dump();

    slots_.acquire();
    struct Release {
      std::counting_semaphore<kMaxInFlight>& s;
      ~Release() { s.release(); }
    } release{slots_};

    const int attempts = 1 + std::max(0, options_.retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
      httplib::Client client(host_);
      const auto seconds = options_.timeout.count() / 1000;
      const auto micros = (options_.timeout.count() % 1000) * 1000;
      client.set_connection_timeout(seconds, micros);
      client.set_read_timeout(seconds, micros);
      client.set_write_timeout(seconds, micros);
      auto response = client.Post(path_, payload, "application/json");
      if (!response) {
        continue;
      }
      return parse_relation(response->status, response->body) == "entailment";
    }
    throw Error(ErrorCode::kOracleUnavailable,
                "entailment service at " + options_.endpoint + " unreachable after " +
                    std::to_string(attempts) + " attempt(s)");
  }

  std::string name() const override { return "remote:" + options_.endpoint; }

 private:
  static constexpr int kMaxInFlight = 1024;

  static std::string parse_relation(int status, const std::string& body) {
    if (status != 200) {
      throw Error(ErrorCode::kMalformedResponse,
                  "entailment service returned HTTP " + std::to_string(status));
    }
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("relation") ||
        !doc["relation"].is_string()) {
      throw Error(ErrorCode::kMalformedResponse, "entailment response lacks a \"relation\" string");
    }
    auto relation = doc["relation"].get<std::string>();
    if (relation != "entailment" && relation != "neutral" && relation != "contradiction") {
      throw Error(ErrorCode::kMalformedResponse, "unknown relation '" + relation + "'");
    }
    if (doc.contains("scores")) {
      const auto& scores = doc["scores"];
      if (!scores.is_object()) {
        throw Error(ErrorCode::kMalformedResponse, "\"scores\" must be an object");
      }
      for (const auto& [key, value] : scores.items()) {
        if (!value.is_number()) {
          throw Error(ErrorCode::kMalformedResponse, "score for '" + key + "' is not a number");
        }
      }
    }
    return relation;
  }

  RemoteOracleOptions options_;
  std::string host_;
  std::string path_;
  mutable std::counting_semaphore<kMaxInFlight> slots_;
};

class IndicatorSimilarity final : public SimilarityFunction {
 public:
  explicit IndicatorSimilarity(OraclePtr oracle) : oracle_(std::move(oracle)) {}
  double similarity(std::string_view q, std::string_view a, std::string_view b) const override {
    return oracle_->equivalent(q, a, b) ? 1.0 : 0.0;
  }
  std::string name() const override { return "indicator"; }

 private:
  OraclePtr oracle_;
};

class LexicalSimilarity final : public SimilarityFunction {
 public:
  double similarity(std::string_view, std::string_view a, std::string_view b) const override {
    const auto na = normalize_response(a);
    const auto nb = normalize_response(b);
    if (na == nb) {
      return 1.0;
    }
    const auto ga = trigrams(na);
    const auto gb = trigrams(nb);
    std::size_t shared = 0;
    for (const auto& g : ga) {
      shared += gb.count(g);
    }
    const std::size_t total = ga.size() + gb.size() - shared;
    return total == 0 ? 1.0 : static_cast<double>(shared) / static_cast<double>(total);
  }
  std::string name() const override { return "lexical"; }

 private:
  static std::set<std::string> trigrams(const std::string& s) {
    std::set<std::string> grams;
    if (s.size() < 3) {
      grams.insert(s);
      return grams;
    }
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      grams.insert(s.substr(i, 3));
    }
    return grams;
  }
};

}  // namespace

std::string normalize_response(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (std::ispunct(static_cast<unsigned char>(out.back())) ||
                          out.back() == ' ')) {
    out.pop_back();
  }
  return out;
}

OraclePtr exact_oracle() { return std::make_shared<ExactOracle>(); }

OraclePtr normalized_oracle() { return std::make_shared<NormalizedOracle>(); }

OraclePtr remote_oracle(const RemoteOracleOptions& options) {
  return std::make_shared<RemoteOracle>(options);
}

OraclePtr noisy_oracle(OraclePtr base, double flip_prob, std::uint64_t seed) {
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flip probability must lie in [0,1]");
  }
  return std::make_shared<NoisyOracle>(std::move(base), flip_prob, seed);
}

OraclePtr make_oracle(std::string_view selector, const RemoteOracleOptions& remote) {
  if (selector == "exact") {
    return exact_oracle();
  }
  if (selector == "normalized") {
    return normalized_oracle();
  }
  if (selector.starts_with("remote:")) {
    RemoteOracleOptions options = remote;
    options.endpoint = std::string(selector.substr(7));
    return remote_oracle(options);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown oracle '" + std::string(selector) +
                                               "' (expected exact, normalized, remote:<URL>)");
}

SimilarityPtr indicator_similarity(OraclePtr oracle) {
  return std::make_shared<IndicatorSimilarity>(std::move(oracle));
}

SimilarityPtr lexical_similarity() { return std::make_shared<LexicalSimilarity>(); }

}  // namespace respcal
