#include "fki/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

namespace fki {

FeatureSpec FeatureSpec::numeric(std::string name, double lower, double upper, int linguistic)
{
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::Numeric;
    f.lower = lower;
    f.upper = upper;
    f.num_linguistic = linguistic;
    return f;
}

FeatureSpec FeatureSpec::categorical(std::string name, std::vector<std::string> categories)
{
    FeatureSpec f;
    f.name = std::move(name);
    f.kind = FeatureKind::Categorical;
    f.lower = 0.0;
    f.upper = 0.0;
    f.categories = std::move(categories);
    f.num_linguistic = 0;
    return f;
}

void validate(const FeatureSpec& feature)
{
    if (feature.is_numeric()) {
        if (!(std::isfinite(feature.lower) && std::isfinite(feature.upper) && feature.lower < feature.upper))
            throw std::invalid_argument("feature '" + feature.name + "': lower must be < upper");
        if (feature.num_linguistic < 1)
            throw std::invalid_argument("feature '" + feature.name + "': num_linguistic must be >= 1");
        return;
    }
    if (feature.categories.empty())
        throw std::invalid_argument("feature '" + feature.name + "': categories must be non-empty");
    std::set<std::string> seen(feature.categories.begin(), feature.categories.end());
    if (seen.size() != feature.categories.size())
        throw std::invalid_argument("feature '" + feature.name + "': duplicate category");
}

bool same_schema(std::span<const FeatureSpec> a, std::span<const FeatureSpec> b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name || a[i].kind != b[i].kind)
            return false;
        if (a[i].is_numeric() ? a[i].num_linguistic != b[i].num_linguistic
                              : a[i].categories != b[i].categories)
            return false;
    }
    return true;
}

int KnowledgeBase::partition_index(std::size_t feature) const
{
    if (!features.at(feature).is_numeric())
        return -1;
    int idx = 0;
    for (std::size_t i = 0; i < feature; ++i)
        idx += features[i].is_numeric() ? 1 : 0;
    return idx;
}

void validate(const KnowledgeBase& kb)
{
    for (const auto& f : kb.features)
        validate(f);
    if (kb.classes.empty())
        throw std::invalid_argument("knowledge base has no classes");

    std::size_t numeric = 0;
    for (const auto& f : kb.features) {
        if (!f.is_numeric())
            continue;
        if (numeric >= kb.partitions.size())
            throw std::invalid_argument("missing partition for feature '" + f.name + "'");
        const auto& p = kb.partitions[numeric++];
        if (p.mfs.size() != static_cast<std::size_t>(f.num_linguistic))
            throw std::invalid_argument("partition size mismatch for feature '" + f.name + "'");
        for (std::size_t j = 0; j < p.mfs.size(); ++j) {
            if (!(p.mfs[j].half_width > 0.0) || !std::isfinite(p.mfs[j].center))
                throw std::invalid_argument("degenerate membership function on '" + f.name + "'");
            if (j > 0 && p.mfs[j].center < p.mfs[j - 1].center)
                throw std::invalid_argument("partition centers out of order on '" + f.name + "'");
        }
    }
    if (numeric != kb.partitions.size())
        throw std::invalid_argument("partition count does not match numeric feature count");

    if (kb.rules.empty())
        throw std::invalid_argument("knowledge base has no rules");
    for (const auto& rule : kb.rules) {
        if (rule.antecedents.size() != kb.features.size())
            throw std::invalid_argument("rule arity does not match feature count");
        if (rule.consequent < 0 || rule.consequent >= static_cast<int>(kb.classes.size()))
            throw std::invalid_argument("rule consequent out of range");
        for (std::size_t i = 0; i < rule.antecedents.size(); ++i) {
            const auto& tok = rule.antecedents[i];
            if (tok.is_dont_care())
                continue;
            const auto& f = kb.features[i];
            const auto expected = f.is_numeric() ? AntecedentToken::Kind::Linguistic
                                                 : AntecedentToken::Kind::Category;
            if (tok.kind() != expected || tok.index() < 0 || tok.index() >= f.value_count())
                throw std::invalid_argument("antecedent out of range on '" + f.name + "'");
        }
    }
}

void validate(const LabeledDataset& data)
{
    for (const auto& f : data.features)
        validate(f);
    for (const auto& row : data.rows) {
        if (row.instance.values.size() != data.features.size())
            throw std::invalid_argument("instance arity does not match feature count");
        if (row.label < 0 || row.label >= static_cast<int>(data.classes.size()))
            throw std::invalid_argument("row label out of range");
    }
}

double membership_degree(const TriangularMF& mf, double x) noexcept
{
    return std::max(0.0, 1.0 - std::abs(x - mf.center) / mf.half_width);
}

double firing_strength(const FuzzyRule& rule, const KnowledgeBase& kb, const Instance& inst)
{
    double strength = 1.0;
    int partition = 0;
    for (std::size_t i = 0; i < kb.features.size(); ++i) {
        const bool numeric = kb.features[i].is_numeric();
        const auto& tok = rule.antecedents[i];
        const auto& value = inst.values[i];
        if (!tok.is_dont_care() && value) {
            if (numeric)
                strength *= membership_degree(kb.partitions[partition].mfs[tok.index()], *value);
            else
                strength *= (static_cast<int>(*value) == tok.index()) ? 1.0 : 0.0;
        }
        if (numeric)
            ++partition;
    }
    return strength;
}

std::optional<int> classify_instance(const KnowledgeBase& kb, const Instance& inst)
{
    double best = 0.0;
    std::optional<int> winner;
    for (const auto& rule : kb.rules) {
        const double s = firing_strength(rule, kb, inst);
        if (s > best) {
            best = s;
            winner = rule.consequent;
        }
    }
    return winner;
}

std::size_t correct_count(const KnowledgeBase& kb, const LabeledDataset& data)
{
    std::size_t correct = 0;
    for (const auto& row : data.rows) {
        const auto predicted = classify_instance(kb, row.instance);
        if (predicted && *predicted == row.label)
            ++correct;
    }
    return correct;
}

double accuracy(const KnowledgeBase& kb, const LabeledDataset& data)
{
    if (data.rows.empty())
        throw std::invalid_argument("accuracy is undefined on an empty dataset");
    return static_cast<double>(correct_count(kb, data)) / static_cast<double>(data.rows.size());
}

double complexity(std::size_t rule_count, std::span<const std::size_t> source_rule_counts)
{
    if (source_rule_counts.empty())
        throw std::invalid_argument("complexity needs at least one source rule set");
    if (rule_count < 1)
        throw std::invalid_argument("complexity needs at least one rule");
    double total = 0.0;
    for (auto n : source_rule_counts) {
        if (n < 1)
            throw std::invalid_argument("source rule counts must be >= 1");
        total += static_cast<double>(n);
    }
    const double mean = total / static_cast<double>(source_rule_counts.size());
    return static_cast<double>(rule_count) / mean;
}

double fitness(double accuracy, double complexity, double alpha)
{
    if (!(complexity > 0.0))
        throw std::invalid_argument("fitness needs complexity > 0");
    return accuracy / std::pow(complexity, alpha);
}

FitnessReport evaluate(const KnowledgeBase& kb, const LabeledDataset& data,
                       std::span<const std::size_t> source_rule_counts, double alpha)
{
    FitnessReport r;
    r.accuracy = accuracy(kb, data);
    r.complexity = complexity(kb.rules.size(), source_rule_counts);
    r.fitness = fitness(r.accuracy, r.complexity, alpha);
    return r;
}

LinguisticPartition repair_partition(LinguisticPartition p, const FeatureSpec& feature)
{
    if (!feature.is_numeric())
        throw std::invalid_argument("repair_partition needs a numeric feature");
    const double range = feature.range();
    const double w_min = kMinWidthFraction * range;
    for (auto& mf : p.mfs) {
        // NaN compares false everywhere; pin it to the lower end first.
        if (std::isnan(mf.center))
            mf.center = feature.lower;
        if (std::isnan(mf.half_width))
            mf.half_width = w_min;
        mf.center = std::clamp(mf.center, feature.lower, feature.upper);
        mf.half_width = std::clamp(mf.half_width, w_min, range);
    }
    std::stable_sort(p.mfs.begin(), p.mfs.end(),
                     [](const TriangularMF& a, const TriangularMF& b) { return a.center < b.center; });
    return p;
}

CompiledDataset::CompiledDataset(const LabeledDataset& data)
    : data_(&data)
{
    slot_offset_.reserve(data.features.size());
    for (const auto& f : data.features) {
        slot_offset_.push_back(stride_);
        stride_ += static_cast<std::size_t>(f.value_count());
    }
    categorical_table_.assign(stride_ * data.rows.size(), 0.0);
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        double* row = categorical_table_.data() + r * stride_;
        for (std::size_t i = 0; i < data.features.size(); ++i) {
            const auto& f = data.features[i];
            if (f.is_numeric())
                continue;
            const auto& value = data.rows[r].instance.values[i];
            for (int k = 0; k < f.value_count(); ++k)
                row[slot_offset_[i] + k] = (!value || static_cast<int>(*value) == k) ? 1.0 : 0.0;
        }
    }
}

std::size_t CompiledDataset::correct_count(const KnowledgeBase& kb) const
{
    const auto& data = *data_;
    const std::size_t n_features = data.features.size();

    std::vector<std::uint32_t> terms;
    std::vector<std::uint32_t> rule_end;
    rule_end.reserve(kb.rules.size());
    for (const auto& rule : kb.rules) {
        for (std::size_t i = 0; i < n_features; ++i) {
            const auto& tok = rule.antecedents[i];
            if (!tok.is_dont_care())
                terms.push_back(static_cast<std::uint32_t>(slot_offset_[i] + tok.index()));
        }
        rule_end.push_back(static_cast<std::uint32_t>(terms.size()));
    }

    std::vector<double> table = categorical_table_;
    std::size_t partition = 0;
    for (std::size_t i = 0; i < n_features; ++i) {
        const auto& f = data.features[i];
        if (!f.is_numeric())
            continue;
        const auto& mfs = kb.partitions[partition++].mfs;
        for (std::size_t r = 0; r < data.rows.size(); ++r) {
            const auto& value = data.rows[r].instance.values[i];
            double* slot = table.data() + r * stride_ + slot_offset_[i];
            for (std::size_t j = 0; j < mfs.size(); ++j)
                slot[j] = value ? membership_degree(mfs[j], *value) : 1.0;
        }
    }

    std::size_t correct = 0;
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        const double* row = table.data() + r * stride_;
        double best = 0.0;
        int winner = -1;
        std::uint32_t begin = 0;
        for (std::size_t k = 0; k < rule_end.size(); ++k) {
            const std::uint32_t end = rule_end[k];
            double s = 1.0;
            for (std::uint32_t t = begin; t < end && s > 0.0; ++t)
                s *= row[terms[t]];
            begin = end;
            if (s > best) {
                best = s;
                winner = kb.rules[k].consequent;
                if (best >= 1.0)
                    break; // nothing later can beat a full-strength match
            }
        }
        if (winner == data.rows[r].label)
            ++correct;
    }
    return correct;
}

} // namespace fki
