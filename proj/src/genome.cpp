#include "fki/genome.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fki {

std::size_t Schema::numeric_count() const
{
    return static_cast<std::size_t>(
        std::count_if(features.begin(), features.end(), [](const FeatureSpec& f) { return f.is_numeric(); }));
}

std::size_t Schema::mf_gene_count() const
{
    std::size_t n = 0;
    for (const auto& f : features)
        if (f.is_numeric())
            n += 2 * static_cast<std::size_t>(f.num_linguistic);
    return n;
}

Schema schema_of(const KnowledgeBase& kb) { return {kb.features, kb.classes}; }
Schema schema_of(const LabeledDataset& data) { return {data.features, data.classes}; }

double Interval::clamp(double x) const
{
    if (std::isnan(x))
        return lower;
    return std::clamp(x, lower, upper);
}

GeneBounds make_bounds(const Schema& schema, std::size_t max_rules)
{
    if (schema.classes.size() < 2)
        throw std::invalid_argument("gene bounds need at least two classes");
    if (max_rules < 1)
        throw std::invalid_argument("max_rules must be >= 1");

    GeneBounds b;
    b.max_rules = max_rules;
    for (const auto& f : schema.features) {
        validate(f);
        b.rule_code.push_back({0.0, static_cast<double>(f.value_count())});
        if (!f.is_numeric())
            continue;
        const double range = f.range();
        for (int j = 0; j < f.num_linguistic; ++j) {
            b.mf.push_back({f.lower, f.upper});
            b.mf.push_back({kMinWidthFraction * range, range});
        }
    }
    b.rule_code.push_back({0.0, static_cast<double>(schema.classes.size() - 1)});
    return b;
}

std::size_t default_max_rules(std::span<const std::size_t> source_rule_counts)
{
    if (source_rule_counts.empty())
        throw std::invalid_argument("need at least one source rule count");
    double total = 0.0;
    for (auto n : source_rule_counts)
        total += static_cast<double>(n);
    const double mean = total / static_cast<double>(source_rule_counts.size());
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(3.0 * mean)));
}

Genome encode(const KnowledgeBase& kb)
{
    Genome g;
    g.rule_genes.reserve(kb.rules.size());
    for (const auto& rule : kb.rules) {
        RuleGene gene;
        gene.codes.reserve(kb.features.size() + 1);
        for (std::size_t i = 0; i < kb.features.size(); ++i) {
            const auto& tok = rule.antecedents[i];
            gene.codes.push_back(tok.is_dont_care() ? static_cast<double>(kb.features[i].value_count())
                                                    : static_cast<double>(tok.index()));
        }
        gene.codes.push_back(static_cast<double>(rule.consequent));
        g.rule_genes.push_back(std::move(gene));
    }
    for (const auto& p : kb.partitions) {
        for (const auto& mf : p.mfs) {
            g.mf_genes.push_back(mf.center);
            g.mf_genes.push_back(mf.half_width);
        }
    }
    return g;
}

namespace {

int round_code(double code, int max_code)
{
    if (std::isnan(code))
        return 0;
    const double r = std::round(std::clamp(code, 0.0, static_cast<double>(max_code)));
    return static_cast<int>(r);
}

} // namespace

KnowledgeBase decode(const Genome& g, const Schema& schema, const GeneBounds& bounds)
{
    if (g.mf_genes.size() != schema.mf_gene_count())
        throw std::invalid_argument("membership segment length does not match schema");
    if (bounds.rule_code.size() != schema.codes_per_rule() || bounds.mf.size() != g.mf_genes.size())
        throw std::invalid_argument("gene bounds do not match schema");
    if (g.rule_genes.empty())
        throw std::invalid_argument("genome has no rule genes");

    KnowledgeBase kb;
    kb.features = schema.features;
    kb.classes = schema.classes;

    std::size_t pos = 0;
    for (const auto& f : schema.features) {
        if (!f.is_numeric())
            continue;
        LinguisticPartition p;
        for (int j = 0; j < f.num_linguistic; ++j) {
            p.mfs.push_back({g.mf_genes[pos], g.mf_genes[pos + 1]});
            pos += 2;
        }
        kb.partitions.push_back(repair_partition(std::move(p), f));
    }

    const auto rule_limit = std::min(g.rule_genes.size(), bounds.max_rules);
    kb.rules.reserve(rule_limit);
    for (std::size_t r = 0; r < rule_limit; ++r) {
        const auto& gene = g.rule_genes[r];
        if (gene.codes.size() != schema.codes_per_rule())
            throw std::invalid_argument("rule gene length does not match schema");
        FuzzyRule rule;
        rule.antecedents.reserve(schema.features.size());
        for (std::size_t i = 0; i < schema.features.size(); ++i) {
            const auto& f = schema.features[i];
            const int count = f.value_count();
            const int code = round_code(gene.codes[i], count);
            if (code == count)
                rule.antecedents.push_back(AntecedentToken::dont_care());
            else if (f.is_numeric())
                rule.antecedents.push_back(AntecedentToken::linguistic(code));
            else
                rule.antecedents.push_back(AntecedentToken::category(code));
        }
        rule.consequent = round_code(gene.codes.back(), static_cast<int>(schema.classes.size()) - 1);
        kb.rules.push_back(std::move(rule));
    }
    return kb;
}

RuleGene random_rule_gene(const GeneBounds& bounds, Rng& rng)
{
    RuleGene gene;
    gene.codes.reserve(bounds.rule_code.size());
    for (const auto& iv : bounds.rule_code)
        gene.codes.push_back(rng.uniform(iv.lower, iv.upper));
    return gene;
}

Genome random_genome(const Schema& schema, const GeneBounds& bounds, std::size_t rule_count, Rng& rng)
{
    if (rule_count < 1 || rule_count > bounds.max_rules)
        throw std::invalid_argument("rule_count must lie in [1, max_rules]");
    if (bounds.mf.size() != schema.mf_gene_count())
        throw std::invalid_argument("gene bounds do not match schema");
    Genome g;
    g.rule_genes.reserve(rule_count);
    for (std::size_t r = 0; r < rule_count; ++r)
        g.rule_genes.push_back(random_rule_gene(bounds, rng));
    g.mf_genes.reserve(bounds.mf.size());
    for (const auto& iv : bounds.mf)
        g.mf_genes.push_back(rng.uniform(iv.lower, iv.upper));
    return g;
}

Genome repair_genome(Genome g, const GeneBounds& bounds)
{
    if (g.mf_genes.size() != bounds.mf.size())
        throw std::invalid_argument("membership segment length does not match bounds");
    if (g.rule_genes.empty())
        throw std::invalid_argument("genome has no rule genes");
    if (g.rule_genes.size() > bounds.max_rules)
        g.rule_genes.resize(bounds.max_rules);
    for (auto& gene : g.rule_genes) {
        if (gene.codes.size() != bounds.rule_code.size())
            throw std::invalid_argument("rule gene length does not match bounds");
        for (std::size_t k = 0; k < gene.codes.size(); ++k)
            gene.codes[k] = bounds.rule_code[k].clamp(gene.codes[k]);
    }
    for (std::size_t k = 0; k < g.mf_genes.size(); ++k)
        g.mf_genes[k] = bounds.mf[k].clamp(g.mf_genes[k]);
    return g;
}

bool within_bounds(const Genome& g, const GeneBounds& bounds)
{
    if (g.rule_genes.empty() || g.rule_genes.size() > bounds.max_rules)
        return false;
    if (g.mf_genes.size() != bounds.mf.size())
        return false;
    for (const auto& gene : g.rule_genes) {
        if (gene.codes.size() != bounds.rule_code.size())
            return false;
        for (std::size_t k = 0; k < gene.codes.size(); ++k)
            if (!bounds.rule_code[k].contains(gene.codes[k]))
                return false;
    }
    for (std::size_t k = 0; k < g.mf_genes.size(); ++k)
        if (!bounds.mf[k].contains(g.mf_genes[k]))
            return false;
    return true;
}

} // namespace fki
