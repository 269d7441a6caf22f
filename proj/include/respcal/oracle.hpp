#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace respcal {

/// Judges directional entailment between two responses to the same question.
///
/// Two responses are equivalent when each entails the other. Implementations
/// must be safe to call concurrently from independent workers.
class EquivalenceOracle {
 public:
  virtual ~EquivalenceOracle() = default;

  virtual bool entails(std::string_view question, std::string_view premise,
                       std::string_view hypothesis) const = 0;

  virtual bool equivalent(std::string_view question, std::string_view a,
                          std::string_view b) const {
    return entails(question, a, b) && entails(question, b, a);
  }

  virtual std::string name() const = 0;
};

/// Symmetric similarity in [0,1] with similarity(q, a, a) == 1.
class SimilarityFunction {
 public:
  virtual ~SimilarityFunction() = default;
  virtual double similarity(std::string_view question, std::string_view a,
                            std::string_view b) const = 0;
  virtual std::string name() const = 0;
};

using OraclePtr = std::shared_ptr<const EquivalenceOracle>;
using SimilarityPtr = std::shared_ptr<const SimilarityFunction>;

/// Byte-identical responses only.
OraclePtr exact_oracle();

/// Lowercase, trim, collapse whitespace runs, strip trailing punctuation, then compare.
OraclePtr normalized_oracle();
std::string normalize_response(std::string_view text);

struct RemoteOracleOptions {
  std::string endpoint;  // http://host:port/path
  std::chrono::milliseconds timeout{10'000};
  int retries = 2;
  int max_in_flight = 8;
};

/// Client for an external NLI judge.
///
/// Sends one POST per ordered pair with body
/// {"question", "premise", "hypothesis"} and expects {"relation": ...}.
/// Throws OracleUnavailable once retries are exhausted and MalformedResponse on
/// a non-200 status or a body without a valid "relation".
OraclePtr remote_oracle(const RemoteOracleOptions& options);

/// Wraps `base` and flips each unordered-pair judgment with probability `flip_prob`.
/// Flips are a deterministic function of (seed, question, pair), so repeated
/// queries agree. Exercises non-transitive paths; carries no guarantee claims.
OraclePtr noisy_oracle(OraclePtr base, double flip_prob, std::uint64_t seed);

/// Builds an oracle from "exact", "normalized", or "remote:<URL>".
OraclePtr make_oracle(std::string_view selector, const RemoteOracleOptions& remote = {});

/// 1 when the oracle judges the pair equivalent, else 0.
SimilarityPtr indicator_similarity(OraclePtr oracle);

/// Jaccard overlap of character trigrams of the normalized responses.
SimilarityPtr lexical_similarity();

}  // namespace respcal
