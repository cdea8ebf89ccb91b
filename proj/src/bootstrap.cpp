#include "fki/bootstrap.hpp"

#include <map>
#include <stdexcept>

#include "fki/dataset.hpp"

namespace fki {

LinguisticPartition uniform_partition(const FeatureSpec& feature)
{
    if (!feature.is_numeric())
        throw std::invalid_argument("uniform_partition needs a numeric feature");
    validate(feature);
    LinguisticPartition p;
    const int L = feature.num_linguistic;
    if (L == 1) {
        p.mfs.push_back({0.5 * (feature.lower + feature.upper), 0.5 * feature.range()});
        return p;
    }
    const double spacing = feature.range() / static_cast<double>(L - 1);
    for (int j = 0; j < L; ++j) {
        // pin the last center to `upper` exactly instead of accumulating rounding
        const double c = (j == L - 1) ? feature.upper : feature.lower + spacing * j;
        p.mfs.push_back({c, spacing});
    }
    return p;
}

std::vector<LinguisticPartition> uniform_partitions(const std::vector<FeatureSpec>& features)
{
    std::vector<LinguisticPartition> out;
    for (const auto& f : features)
        if (f.is_numeric())
            out.push_back(uniform_partition(f));
    return out;
}

namespace {

struct Candidate {
    FuzzyRule rule;
    double strength = 0.0;
};

/// Antecedent key usable in an ordered map.
std::vector<int> key_of(const FuzzyRule& rule)
{
    std::vector<int> key;
    key.reserve(rule.antecedents.size());
    for (const auto& tok : rule.antecedents)
        key.push_back(tok.is_dont_care() ? -1 : tok.index());
    return key;
}

} // namespace

KnowledgeBase induce_rule_set(const LabeledDataset& share, const std::vector<LinguisticPartition>& partitions)
{
    if (share.rows.empty())
        throw std::invalid_argument("cannot induce rules from an empty share");

    KnowledgeBase kb;
    kb.features = share.features;
    kb.classes = share.classes;
    kb.partitions = partitions;

    std::vector<Candidate> kept;
    std::map<std::vector<int>, std::size_t> slot;
    for (const auto& row : share.rows) {
        Candidate cand;
        cand.rule.consequent = row.label;
        cand.strength = 1.0;
        std::size_t part = 0;
        for (std::size_t i = 0; i < share.features.size(); ++i) {
            const auto& f = share.features[i];
            const auto& value = row.instance.values[i];
            if (!f.is_numeric()) {
                cand.rule.antecedents.push_back(value ? AntecedentToken::category(static_cast<int>(*value))
                                                      : AntecedentToken::dont_care());
                continue;
            }
            const auto& mfs = partitions.at(part++).mfs;
            if (!value) {
                cand.rule.antecedents.push_back(AntecedentToken::dont_care());
                continue;
            }
            int best = -1;
            double degree = 0.0;
            for (std::size_t j = 0; j < mfs.size(); ++j) {
                const double d = membership_degree(mfs[j], *value);
                if (d > degree) {
                    degree = d;
                    best = static_cast<int>(j);
                }
            }
            // a value outside every triangle says nothing about this feature
            cand.rule.antecedents.push_back(best < 0 ? AntecedentToken::dont_care() : AntecedentToken::linguistic(best));
            if (best >= 0)
                cand.strength *= degree;
        }

        const auto key = key_of(cand.rule);
        const auto it = slot.find(key);
        if (it == slot.end()) {
            slot.emplace(key, kept.size());
            kept.push_back(std::move(cand));
            continue;
        }
        auto& incumbent = kept[it->second];
        if (cand.strength > incumbent.strength
            || (cand.strength == incumbent.strength && cand.rule.consequent < incumbent.rule.consequent))
            incumbent = std::move(cand);
    }

    kb.rules.reserve(kept.size());
    for (auto& c : kept)
        kb.rules.push_back(std::move(c.rule));
    return kb;
}

std::vector<KnowledgeBase> bootstrap_sources(const LabeledDataset& data, std::size_t P, std::uint64_t seed)
{
    const auto partitions = uniform_partitions(data.features);
    std::vector<KnowledgeBase> sources;
    for (const auto& share : split_sources(data, P, seed))
        sources.push_back(induce_rule_set(share, partitions));
    return sources;
}

} // namespace fki
