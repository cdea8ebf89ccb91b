#pragma once

// Real-coded string form of a knowledge base: a variable-length rule segment
// followed by a fixed-length (center, half width) membership segment.

#include <cstddef>
#include <span>
#include <vector>

#include "fki/fuzzy.hpp"
#include "fki/random.hpp"

namespace fki {

/// Features plus class names; everything decode needs besides the genes.
struct Schema {
    std::vector<FeatureSpec> features;
    std::vector<std::string> classes;

    std::size_t numeric_count() const;
    /// Total membership genes: 2 * sum of L_i over numeric features.
    std::size_t mf_gene_count() const;
    /// Feature codes followed by the class code.
    std::size_t codes_per_rule() const { return features.size() + 1; }

    bool operator==(const Schema&) const = default;
};

Schema schema_of(const KnowledgeBase& kb);
Schema schema_of(const LabeledDataset& data);

/// One code per feature plus a trailing class code. A feature code equal to the
/// feature's value count decodes to DontCare.
struct RuleGene {
    std::vector<double> codes;

    bool operator==(const RuleGene&) const = default;
};

struct Genome {
    std::vector<RuleGene> rule_genes;
    /// (c_11, w_11, c_12, w_12, ...) over numeric features and their linguistic values.
    std::vector<double> mf_genes;

    bool operator==(const Genome&) const = default;
};

struct Interval {
    double lower = 0.0;
    double upper = 1.0;

    double clamp(double x) const;
    bool contains(double x) const { return x >= lower && x <= upper; }
    bool operator==(const Interval&) const = default;
};

struct GeneBounds {
    std::vector<Interval> mf;
    /// Bounds for each position of a RuleGene (features then class).
    std::vector<Interval> rule_code;
    std::size_t max_rules = 1;

    bool operator==(const GeneBounds&) const = default;
};

/// Derives bounds from the schema. Throws std::invalid_argument for fewer than
/// two classes (the class code would have an empty interval) or max_rules < 1.
GeneBounds make_bounds(const Schema& schema, std::size_t max_rules);

/// Default rule cap: three times the mean source rule count, at least 1.
std::size_t default_max_rules(std::span<const std::size_t> source_rule_counts);

Genome encode(const KnowledgeBase& kb);

/// Rounds codes to the nearest integer, clamps them into range and repairs the
/// partitions. Throws std::invalid_argument on length mismatch.
KnowledgeBase decode(const Genome& g, const Schema& schema, const GeneBounds& bounds);

RuleGene random_rule_gene(const GeneBounds& bounds, Rng& rng);

Genome random_genome(const Schema& schema, const GeneBounds& bounds, std::size_t rule_count, Rng& rng);

/// Clamps every gene into bounds and truncates the rule list to max_rules.
Genome repair_genome(Genome g, const GeneBounds& bounds);

/// True when every gene is in bounds and the rule count is in [1, max_rules].
bool within_bounds(const Genome& g, const GeneBounds& bounds);

} // namespace fki
