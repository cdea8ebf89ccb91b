#pragma once

// Builds source knowledge bases from data when no expert rule sets exist:
// evenly spaced triangular partitions plus single-pass rule induction.

#include <cstdint>
#include <vector>

#include "fki/fuzzy.hpp"

namespace fki {

/// L >= 2: centers evenly spaced over [lower, upper], half width = spacing.
/// L = 1: one triangle at the midpoint with half width (upper - lower) / 2.
LinguisticPartition uniform_partition(const FeatureSpec& feature);

std::vector<LinguisticPartition> uniform_partitions(const std::vector<FeatureSpec>& features);

/// One candidate rule per row (max-membership linguistic value per numeric
/// feature, the row's category per categorical feature). Rows mapping to the
/// same antecedent collapse into one rule; on class conflicts the row with
/// the highest own-rule strength wins, then the lowest class index.
/// Throws std::invalid_argument on an empty share.
KnowledgeBase induce_rule_set(const LabeledDataset& share, const std::vector<LinguisticPartition>& partitions);

/// Splits `data` into P shares and induces one knowledge base per share, all
/// over `data`'s schema and uniform partitions.
std::vector<KnowledgeBase> bootstrap_sources(const LabeledDataset& data, std::size_t P, std::uint64_t seed);

} // namespace fki
