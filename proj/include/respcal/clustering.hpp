#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "respcal/oracle.hpp"
#include "respcal/types.hpp"

namespace respcal {

/// Semantic clustering of a record's first `prefix_len` samples.
///
/// For every sample m, collects the prefix indices the oracle judges
/// equivalent to it and sets F_m = |equivalents[m]| / prefix_len. No
/// transitive closure is applied, so lists may overlap under a
/// non-transitive oracle. Each unordered pair is judged once.
ClusterAssignment cluster(const QARecord& record, const EquivalenceOracle& oracle,
                          std::optional<std::size_t> prefix_len = std::nullopt);

/// F_m of a clustered sample. Throws IndexOutOfRange.
double frequency(const ClusterAssignment& assignment, std::size_t m);

/// Sum over samples j not equivalent to m of sim(q, y_j, y_m) * F_j.
double semantic_diversity(const ClusterAssignment& assignment, const QARecord& record,
                          const SimilarityFunction& sim, std::size_t m);

/// Greedy left-to-right scan: keeps a member unless it is equivalent to a kept one.
std::vector<std::size_t> dedup(std::span<const std::size_t> members, const QARecord& record,
                               const EquivalenceOracle& oracle);

}  // namespace respcal
