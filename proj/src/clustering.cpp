#include "respcal/clustering.hpp"

#include <string>

#include "respcal/error.hpp"

namespace respcal {

ClusterAssignment cluster(const QARecord& record, const EquivalenceOracle& oracle,
                          std::optional<std::size_t> prefix_len) {
  const std::size_t n = prefix_len.value_or(record.samples.size());
  if (n == 0) {
    throw Error(ErrorCode::kEmptySamples, "record '" + record.id + "': empty sample prefix");
  }
  if (n > record.samples.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "record '" + record.id + "': prefix " + std::to_string(n) + " exceeds " +
                    std::to_string(record.samples.size()) + " samples");
  }

  // Upper triangle only; equivalent() is symmetric for every oracle.
  std::vector<char> same(n * n, 0);
  for (std::size_t m = 0; m < n; ++m) {
    same[m * n + m] = 1;
    for (std::size_t j = m + 1; j < n; ++j) {
      const bool eq = oracle.equivalent(record.question, record.samples[j], record.samples[m]);
      same[m * n + j] = same[j * n + m] = eq ? 1 : 0;
    }
  }

  ClusterAssignment out;
  out.record_id = record.id;
  out.equivalents.resize(n);
  out.counts.resize(n);
  out.frequencies.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) {
      if (same[m * n + j]) {
        out.equivalents[m].push_back(j);
      }
    }
    out.counts[m] = out.equivalents[m].size();
    out.frequencies[m] = static_cast<double>(out.counts[m]) / static_cast<double>(n);
  }
  return out;
}

double frequency(const ClusterAssignment& assignment, std::size_t m) {
  if (m >= assignment.prefix_len()) {
    throw Error(ErrorCode::kIndexOutOfRange, "sample index " + std::to_string(m) +
                                                 " outside prefix of " +
                                                 std::to_string(assignment.prefix_len()));
  }
  return assignment.frequencies[m];
}

double semantic_diversity(const ClusterAssignment& assignment, const QARecord& record,
                          const SimilarityFunction& sim, std::size_t m) {
  const std::size_t n = assignment.prefix_len();
  if (m >= n) {
    throw Error(ErrorCode::kIndexOutOfRange, "sample index " + std::to_string(m) +
                                                 " outside prefix of " + std::to_string(n));
  }
  const auto& same = assignment.equivalents[m];
  double total = 0.0;
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j) {
    while (k < same.size() && same[k] < j) {
      ++k;
    }
    if (k < same.size() && same[k] == j) {
      continue;
    }
    total += sim.similarity(record.question, record.samples[j], record.samples[m]) *
             assignment.frequencies[j];
  }
  return total;
}

std::vector<std::size_t> dedup(std::span<const std::size_t> members, const QARecord& record,
                               const EquivalenceOracle& oracle) {
  std::vector<std::size_t> kept;
  for (const std::size_t m : members) {
    if (m >= record.samples.size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "dedup member outside record '" + record.id + "'");
    }
    bool duplicate = false;
    for (const std::size_t r : kept) {
      if (oracle.equivalent(record.question, record.samples[r], record.samples[m])) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      kept.push_back(m);
    }
  }
  return kept;
}

}  // namespace respcal
