#include "fki/evolution.hpp"

#include <algorithm>

namespace fki {

namespace {

std::size_t roulette(std::span<const Individual> pop, double total, Rng& rng)
{
    if (!(total > 0.0))
        return static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pop.size()) - 1));
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        acc += pop[i].fitness();
        if (target < acc)
            return i;
    }
    return pop.size() - 1;
}

/// Uniform reset of each gene with probability `rate`; returns whether anything changed.
bool reset_mutation(Genome& g, const GeneBounds& bounds, double rate, Rng& rng)
{
    bool changed = false;
    for (auto& gene : g.rule_genes) {
        for (std::size_t k = 0; k < gene.codes.size(); ++k) {
            if (rng.bernoulli(rate)) {
                gene.codes[k] = rng.uniform(bounds.rule_code[k].lower, bounds.rule_code[k].upper);
                changed = true;
            }
        }
    }
    for (std::size_t k = 0; k < g.mf_genes.size(); ++k) {
        if (rng.bernoulli(rate)) {
            g.mf_genes[k] = rng.uniform(bounds.mf[k].lower, bounds.mf[k].upper);
            changed = true;
        }
    }
    return changed;
}

} // namespace

Genome one_point_crossover(const Genome& a, const Genome& b, std::size_t cut)
{
    cut = std::min({cut, a.rule_genes.size(), b.rule_genes.size()});
    Genome child;
    child.rule_genes.reserve(b.rule_genes.size());
    child.rule_genes.insert(child.rule_genes.end(), a.rule_genes.begin(),
                            a.rule_genes.begin() + static_cast<std::ptrdiff_t>(cut));
    child.rule_genes.insert(child.rule_genes.end(), b.rule_genes.begin() + static_cast<std::ptrdiff_t>(cut),
                            b.rule_genes.end());
    child.mf_genes = b.mf_genes;
    return child;
}

Population baseline_ga_step(const Population& pop, const Evaluator& evaluate, const EvolutionConfig& cfg,
                            Rng& rng)
{
    const auto& parents = pop.individuals;
    for (const auto& ind : parents)
        if (!ind.report)
            throw std::invalid_argument("individual has no fitness report");
    const auto& bounds = evaluate.bounds();
    const std::size_t mu = parents.size();

    std::size_t elite = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < mu; ++i) {
        total += parents[i].fitness();
        if (parents[i].fitness() > parents[elite].fitness())
            elite = i;
    }

    Population next;
    next.subpop_count = pop.subpop_count;
    next.individuals.reserve(mu);
    next.individuals.push_back(parents[elite]);

    while (next.individuals.size() < mu) {
        const auto& a = parents[roulette(parents, total, rng)];
        const auto& b = parents[roulette(parents, total, rng)];
        Individual c1 = a;
        Individual c2 = b;
        if (rng.bernoulli(cfg.ga_crossover_rate)) {
            const auto limit = std::min(a.genome.rule_genes.size(), b.genome.rule_genes.size());
            const auto cut = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(limit)));
            c1 = {one_point_crossover(a.genome, b.genome, cut), std::nullopt};
            c2 = {one_point_crossover(b.genome, a.genome, cut), std::nullopt};
        }
        for (auto* c : {&c1, &c2}) {
            if (reset_mutation(c->genome, bounds, cfg.ga_mutation_rate, rng))
                c->report.reset();
            if (!c->report)
                c->genome = repair_genome(std::move(c->genome), bounds);
        }
        next.individuals.push_back(std::move(c1));
        if (next.individuals.size() < mu)
            next.individuals.push_back(std::move(c2));
    }
    evaluate_population(next, evaluate);
    return next;
}

} // namespace fki
