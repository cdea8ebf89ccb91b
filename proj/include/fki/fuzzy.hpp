#pragma once

// Fuzzy knowledge-base types, product t-norm inference and the
// accuracy/complexity fitness used to score integrated rule sets.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fki {

/// Raised for malformed input data; carries the 1-based line when known.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what)
        , line_(line)
    {
    }
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    double lower = 0.0;
    double upper = 1.0;
    std::vector<std::string> categories;
    int num_linguistic = 3;

    bool is_numeric() const noexcept { return kind == FeatureKind::Numeric; }
    /// Number of distinct non-DontCare antecedent values.
    int value_count() const noexcept
    {
        return is_numeric() ? num_linguistic : static_cast<int>(categories.size());
    }
    double range() const noexcept { return upper - lower; }

    static FeatureSpec numeric(std::string name, double lower, double upper, int linguistic = 3);
    static FeatureSpec categorical(std::string name, std::vector<std::string> categories);

    bool operator==(const FeatureSpec&) const = default;
};

/// Throws std::invalid_argument when the spec breaks its invariants.
void validate(const FeatureSpec& feature);

/// Same features and classes, ignoring numeric bounds.
bool same_schema(std::span<const FeatureSpec> a, std::span<const FeatureSpec> b);

/// Isosceles triangle with apex at `center` and support [center - half_width, center + half_width].
struct TriangularMF {
    double center = 0.0;
    double half_width = 1.0;

    bool operator==(const TriangularMF&) const = default;
};

struct LinguisticPartition {
    std::vector<TriangularMF> mfs;

    bool operator==(const LinguisticPartition&) const = default;
};

class AntecedentToken {
public:
    enum class Kind { Linguistic, Category, DontCare };

    static constexpr AntecedentToken linguistic(int j) noexcept { return {Kind::Linguistic, j}; }
    static constexpr AntecedentToken category(int k) noexcept { return {Kind::Category, k}; }
    static constexpr AntecedentToken dont_care() noexcept { return {Kind::DontCare, -1}; }

    constexpr Kind kind() const noexcept { return kind_; }
    constexpr int index() const noexcept { return index_; }
    constexpr bool is_dont_care() const noexcept { return kind_ == Kind::DontCare; }

    bool operator==(const AntecedentToken&) const = default;

private:
    constexpr AntecedentToken(Kind kind, int index) noexcept
        : kind_(kind)
        , index_(index)
    {
    }
    Kind kind_;
    int index_;
};

struct FuzzyRule {
    std::vector<AntecedentToken> antecedents;
    int consequent = 0;

    bool operator==(const FuzzyRule&) const = default;
};

struct KnowledgeBase {
    std::vector<FeatureSpec> features;
    std::vector<std::string> classes;
    /// One entry per numeric feature, in feature order.
    std::vector<LinguisticPartition> partitions;
    std::vector<FuzzyRule> rules;

    /// Index into `partitions` for numeric feature `feature`; -1 for categorical.
    int partition_index(std::size_t feature) const;

    bool operator==(const KnowledgeBase&) const = default;
};

/// Throws std::invalid_argument naming the first violated invariant.
void validate(const KnowledgeBase& kb);

/// Numeric features hold the raw value, categorical ones the category index.
struct Instance {
    std::vector<std::optional<double>> values;

    bool operator==(const Instance&) const = default;
};

struct LabeledRow {
    Instance instance;
    int label = 0;

    bool operator==(const LabeledRow&) const = default;
};

struct LabeledDataset {
    std::vector<FeatureSpec> features;
    std::vector<std::string> classes;
    std::vector<LabeledRow> rows;

    bool operator==(const LabeledDataset&) const = default;
};

void validate(const LabeledDataset& data);

struct FitnessReport {
    double accuracy = 0.0;
    double complexity = 1.0;
    double fitness = 0.0;

    bool operator==(const FitnessReport&) const = default;
};

double membership_degree(const TriangularMF& mf, double x) noexcept;

double firing_strength(const FuzzyRule& rule, const KnowledgeBase& kb, const Instance& inst);

/// Winner-take-all by firing strength; lowest rule index wins ties; nullopt when nothing fires.
std::optional<int> classify_instance(const KnowledgeBase& kb, const Instance& inst);

/// Number of rows whose predicted class equals the label.
std::size_t correct_count(const KnowledgeBase& kb, const LabeledDataset& data);

double accuracy(const KnowledgeBase& kb, const LabeledDataset& data);

double complexity(std::size_t rule_count, std::span<const std::size_t> source_rule_counts);

double fitness(double accuracy, double complexity, double alpha);

FitnessReport evaluate(const KnowledgeBase& kb, const LabeledDataset& data,
                       std::span<const std::size_t> source_rule_counts, double alpha);

/// Minimum half width kept by repair, as a fraction of the feature range.
inline constexpr double kMinWidthFraction = 0.01;

LinguisticPartition repair_partition(LinguisticPartition p, const FeatureSpec& feature);

/// Precomputed inference over a fixed dataset. Every antecedent becomes a single
/// lookup into a per-row degree table, so scoring many rule sets against the
/// same rows avoids recomputing categorical matches.
class CompiledDataset {
public:
    explicit CompiledDataset(const LabeledDataset& data);

    const LabeledDataset& data() const noexcept { return *data_; }

    /// Correct-classification count; identical to `correct_count(kb, data())`.
    std::size_t correct_count(const KnowledgeBase& kb) const;

private:
    const LabeledDataset* data_;
    std::size_t stride_ = 0;
    std::vector<std::size_t> slot_offset_;
    std::vector<double> categorical_table_;
};

} // namespace fki
