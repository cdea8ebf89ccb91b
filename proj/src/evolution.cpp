#include "fki/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

namespace fki {

namespace {

void require_probability(double p, const char* field)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(field, "must lie in [0, 1]");
}

/// Runs fn(i) for i in [0, n) across hardware threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

void evaluate_all(std::span<Individual> individuals, const Evaluator& evaluate)
{
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < individuals.size(); ++i)
        if (!individuals[i].report)
            pending.push_back(i);
    parallel_for(pending.size(), [&](std::size_t k) {
        auto& ind = individuals[pending[k]];
        ind.report = evaluate(ind.genome);
    });
}

std::size_t best_index(std::span<const Individual> individuals)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < individuals.size(); ++i)
        if (individuals[i].fitness() > individuals[best].fitness())
            best = i;
    return best;
}

void require_reports(std::span<const Individual> individuals)
{
    for (const auto& ind : individuals)
        if (!ind.report)
            throw std::invalid_argument("individual has no fitness report");
}

} // namespace

void validate(const EvolutionConfig& cfg)
{
    if (cfg.subpops < 1)
        throw ConfigError("subpops", "must be >= 1");
    if (cfg.mu < 2 * cfg.subpops)
        throw ConfigError("mu", "must be at least twice subpops");
    if (cfg.generations < 1)
        throw ConfigError("generations", "must be >= 1");
    if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0)
        throw ConfigError("alpha", "must be a finite value >= 0");
    require_probability(cfg.p_mf_mutation, "p_mf_mutation");
    if (!(cfg.tvm_degree > 0.0) || !std::isfinite(cfg.tvm_degree))
        throw ConfigError("tvm_degree", "must be > 0");
    require_probability(cfg.p_insert, "p_insert");
    require_probability(cfg.p_delete, "p_delete");
    if (!(std::isfinite(cfg.lambda_range.first) && std::isfinite(cfg.lambda_range.second)
          && cfg.lambda_range.first < cfg.lambda_range.second))
        throw ConfigError("lambda_range", "lower must be < upper");
    require_probability(cfg.ga_crossover_rate, "ga_crossover_rate");
    require_probability(cfg.ga_mutation_rate, "ga_mutation_rate");
}

Evaluator::Evaluator(Schema schema, GeneBounds bounds, const LabeledDataset& data,
                     std::vector<std::size_t> source_rule_counts, double alpha)
    : schema_(std::move(schema))
    , bounds_(std::move(bounds))
    , compiled_(data)
    , source_counts_(std::move(source_rule_counts))
    , alpha_(alpha)
{
    if (!same_schema(schema_.features, data.features) || schema_.classes != data.classes)
        throw DataError("dataset schema does not match the knowledge-base schema");
    if (data.rows.empty())
        throw std::invalid_argument("cannot evaluate against an empty dataset");
    // fail early on an empty or zero source list
    (void)complexity(1, source_counts_);
}

FitnessReport Evaluator::operator()(const Genome& g) const
{
    const auto kb = decode(g, schema_, bounds_);
    FitnessReport r;
    r.accuracy = static_cast<double>(compiled_.correct_count(kb))
        / static_cast<double>(compiled_.data().rows.size());
    r.complexity = complexity(kb.rules.size(), source_counts_);
    r.fitness = fitness(r.accuracy, r.complexity, alpha_);
    return r;
}

void evaluate_population(Population& pop, const Evaluator& evaluate)
{
    evaluate_all(pop.individuals, evaluate);
}

Genome merge_sources(std::span<const KnowledgeBase> sources, const GeneBounds& bounds)
{
    if (sources.empty())
        throw std::invalid_argument("need at least one source knowledge base");
    Genome merged;
    std::set<std::vector<double>> seen;
    for (const auto& kb : sources) {
        auto g = encode(kb);
        for (auto& gene : g.rule_genes)
            if (seen.insert(gene.codes).second)
                merged.rule_genes.push_back(std::move(gene));
        if (merged.mf_genes.empty())
            merged.mf_genes.assign(g.mf_genes.size(), 0.0);
        for (std::size_t k = 0; k < g.mf_genes.size(); ++k)
            merged.mf_genes[k] += g.mf_genes[k];
    }
    for (auto& x : merged.mf_genes)
        x /= static_cast<double>(sources.size());
    return repair_genome(std::move(merged), bounds);
}

Population init_population(std::span<const KnowledgeBase> sources, const Schema& schema,
                           const GeneBounds& bounds, const EvolutionConfig& cfg, Rng& rng)
{
    if (sources.empty())
        throw std::invalid_argument("need at least one source knowledge base");
    if (cfg.mu < sources.size() + 1)
        throw ConfigError("mu", "must exceed the number of sources");

    Population pop;
    pop.subpop_count = cfg.subpops;
    pop.individuals.reserve(cfg.mu);
    double total = 0.0;
    for (const auto& kb : sources) {
        pop.individuals.push_back({repair_genome(encode(kb), bounds), std::nullopt});
        total += static_cast<double>(kb.rules.size());
    }
    pop.individuals.push_back({merge_sources(sources, bounds), std::nullopt});

    const auto mean_rules = static_cast<std::int64_t>(std::llround(total / static_cast<double>(sources.size())));
    const auto max_random = std::clamp<std::int64_t>(mean_rules, 1, static_cast<std::int64_t>(bounds.max_rules));
    while (pop.individuals.size() < cfg.mu) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, max_random));
        pop.individuals.push_back({random_genome(schema, bounds, n, rng), std::nullopt});
    }
    return pop;
}

SubpopSummary subpop_elite_and_mean(std::span<const Individual> sub)
{
    if (sub.size() < 2)
        throw std::invalid_argument("a subpopulation needs at least two members");
    require_reports(sub);

    SubpopSummary s;
    s.elite = best_index(sub);

    std::size_t min_rules = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < sub.size(); ++i)
        if (i != s.elite)
            min_rules = std::min(min_rules, sub[i].genome.rule_genes.size());

    const auto& first = sub[s.elite == 0 ? 1 : 0].genome;
    s.mean_mf.assign(first.mf_genes.size(), 0.0);
    s.mean_rules.assign(min_rules, RuleGene{std::vector<double>(first.rule_genes.front().codes.size(), 0.0)});

    for (std::size_t i = 0; i < sub.size(); ++i) {
        if (i == s.elite)
            continue;
        const auto& g = sub[i].genome;
        for (std::size_t k = 0; k < s.mean_mf.size(); ++k)
            s.mean_mf[k] += g.mf_genes[k];
        for (std::size_t r = 0; r < min_rules; ++r)
            for (std::size_t k = 0; k < s.mean_rules[r].codes.size(); ++k)
                s.mean_rules[r].codes[k] += g.rule_genes[r].codes[k];
    }
    const double n = static_cast<double>(sub.size() - 1);
    for (auto& x : s.mean_mf)
        x /= n;
    for (auto& gene : s.mean_rules)
        for (auto& x : gene.codes)
            x /= n;
    return s;
}

Genome sbmac_offspring(const Genome& elite, std::span<const double> mean_mf,
                       std::span<const RuleGene> mean_rules, const Genome& parent, double lambda,
                       const GeneBounds& bounds)
{
    if (parent.rule_genes.empty())
        throw std::invalid_argument("parent has no rule genes");
    if (elite.mf_genes.size() != mean_mf.size())
        throw std::invalid_argument("membership segment lengths differ");

    Genome child;
    child.mf_genes.resize(mean_mf.size());
    for (std::size_t k = 0; k < mean_mf.size(); ++k)
        child.mf_genes[k] = lambda * elite.mf_genes[k] + (1.0 - lambda) * mean_mf[k];

    const std::size_t blended
        = std::min({elite.rule_genes.size(), mean_rules.size(), parent.rule_genes.size()});
    child.rule_genes.reserve(parent.rule_genes.size());
    for (std::size_t r = 0; r < blended; ++r) {
        const auto& e = elite.rule_genes[r].codes;
        const auto& m = mean_rules[r].codes;
        RuleGene gene;
        gene.codes.resize(e.size());
        for (std::size_t k = 0; k < e.size(); ++k)
            gene.codes[k] = lambda * e[k] + (1.0 - lambda) * m[k];
        child.rule_genes.push_back(std::move(gene));
    }
    for (std::size_t r = blended; r < parent.rule_genes.size(); ++r)
        child.rule_genes.push_back(parent.rule_genes[r]);
    return repair_genome(std::move(child), bounds);
}

double tvm_delta(double t, double T, double y, double b, double r)
{
    const double remaining = std::max(0.0, 1.0 - t / T);
    return y * (1.0 - std::pow(r, std::pow(remaining, b)));
}

Genome apply_tvm(Genome g, const GeneBounds& bounds, std::size_t t, std::size_t T,
                 const EvolutionConfig& cfg, Rng& rng)
{
    const auto tt = static_cast<double>(t);
    const auto TT = static_cast<double>(T);
    for (std::size_t k = 0; k < g.mf_genes.size(); ++k) {
        if (!rng.bernoulli(cfg.p_mf_mutation))
            continue;
        const auto& iv = bounds.mf[k];
        double& x = g.mf_genes[k];
        const bool up = rng.bernoulli(0.5);
        const double r = rng.uniform01();
        if (up)
            x += tvm_delta(tt, TT, iv.upper - x, cfg.tvm_degree, r);
        else
            x -= tvm_delta(tt, TT, x - iv.lower, cfg.tvm_degree, r);
        // absorbs the last-ulp rounding of x + (upper - x)
        x = iv.clamp(x);
    }
    return g;
}

Genome insert_rule(Genome g, std::size_t pos, RuleGene gene, std::size_t max_rules)
{
    if (g.rule_genes.size() >= max_rules)
        return g;
    pos = std::min(pos, g.rule_genes.size());
    g.rule_genes.insert(g.rule_genes.begin() + static_cast<std::ptrdiff_t>(pos), std::move(gene));
    return g;
}

Genome delete_rule(Genome g, std::size_t pos)
{
    if (g.rule_genes.size() <= 1 || pos >= g.rule_genes.size())
        return g;
    g.rule_genes.erase(g.rule_genes.begin() + static_cast<std::ptrdiff_t>(pos));
    return g;
}

Genome insertion_deletion_mutate(Genome g, const GeneBounds& bounds, const EvolutionConfig& cfg, Rng& rng)
{
    if (rng.bernoulli(cfg.p_insert) && g.rule_genes.size() < bounds.max_rules) {
        const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(g.rule_genes.size())));
        g = insert_rule(std::move(g), pos, random_rule_gene(bounds, rng), bounds.max_rules);
    }
    if (rng.bernoulli(cfg.p_delete) && g.rule_genes.size() > 1) {
        const auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(g.rule_genes.size()) - 1));
        g = delete_rule(std::move(g), pos);
    }
    return g;
}

std::vector<std::pair<std::size_t, std::size_t>> arrange_subpopulations(Population& pop)
{
    const std::size_t mu = pop.individuals.size();
    const std::size_t S = pop.subpop_count;
    if (S < 1 || mu < 2 * S)
        throw std::invalid_argument("population too small for its subpopulation count");
    require_reports(pop.individuals);

    std::vector<std::size_t> order(mu);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pop.individuals[a].fitness() > pop.individuals[b].fitness();
    });

    std::vector<Individual> arranged;
    arranged.reserve(mu);
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t s = 0; s < S; ++s) {
        const std::size_t begin = arranged.size();
        for (std::size_t rank = s; rank < mu; rank += S)
            arranged.push_back(std::move(pop.individuals[order[rank]]));
        ranges.emplace_back(begin, arranged.size());
    }
    pop.individuals = std::move(arranged);
    return ranges;
}

Population survivor_selection(Population parents, std::vector<Individual> offspring)
{
    require_reports(parents.individuals);
    require_reports(offspring);

    const std::size_t mu = parents.individuals.size();
    const std::size_t total = mu + offspring.size();
    auto fit = [&](std::size_t i) {
        return i < mu ? parents.individuals[i].fitness() : offspring[i - mu].fitness();
    };
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // parents precede offspring, so stability gives older-first then lower index
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit(a) > fit(b); });

    std::vector<bool> parent_kept(mu, false);
    std::vector<std::size_t> incoming;
    for (std::size_t k = 0; k < mu; ++k) {
        if (order[k] < mu)
            parent_kept[order[k]] = true;
        else
            incoming.push_back(order[k] - mu);
    }
    std::size_t next = 0;
    for (std::size_t i = 0; i < mu && next < incoming.size(); ++i)
        if (!parent_kept[i])
            parents.individuals[i] = std::move(offspring[incoming[next++]]);
    return parents;
}

GenerationStats population_stats(const Population& pop, std::size_t generation)
{
    require_reports(pop.individuals);
    GenerationStats st;
    st.generation = generation;
    const auto& best = pop.individuals[best_index(pop.individuals)];
    st.best_fitness = best.report->fitness;
    st.best_accuracy = best.report->accuracy;
    st.best_complexity = best.report->complexity;
    st.best_rule_count = best.genome.rule_genes.size();
    double sum = 0.0;
    for (const auto& ind : pop.individuals)
        sum += ind.fitness();
    st.mean_fitness = sum / static_cast<double>(pop.individuals.size());
    // the mean can land one ulp above a uniform population's best
    st.mean_fitness = std::min(st.mean_fitness, st.best_fitness);
    return st;
}

void nes_generation(Population& pop, const Evaluator& evaluate, std::size_t t,
                    const EvolutionConfig& cfg, Rng& rng)
{
    const auto& bounds = evaluate.bounds();
    const auto ranges = arrange_subpopulations(pop);

    std::vector<Individual> offspring;
    offspring.reserve(pop.individuals.size());
    for (const auto& [begin, end] : ranges) {
        std::span<const Individual> sub(pop.individuals.data() + begin, end - begin);
        const auto summary = subpop_elite_and_mean(sub);
        const auto& elite = sub[summary.elite].genome;
        for (std::size_t i = 0; i < sub.size(); ++i) {
            if (i == summary.elite)
                continue;
            const double lambda = rng.uniform(cfg.lambda_range.first, cfg.lambda_range.second);
            auto child = sbmac_offspring(elite, summary.mean_mf, summary.mean_rules, sub[i].genome, lambda, bounds);
            child = apply_tvm(std::move(child), bounds, t, cfg.generations, cfg, rng);
            child = insertion_deletion_mutate(std::move(child), bounds, cfg, rng);
            offspring.push_back({std::move(child), std::nullopt});
        }
    }
    evaluate_all(offspring, evaluate);
    pop = survivor_selection(std::move(pop), std::move(offspring));
}

IntegrationSetup prepare_integration(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                     const EvolutionConfig& cfg)
{
    validate(cfg);
    if (sources.empty())
        throw std::invalid_argument("need at least one source knowledge base");
    if (cfg.mu < sources.size() + 1)
        throw ConfigError("mu", "must exceed the number of sources");

    IntegrationSetup setup;
    setup.schema = schema_of(sources.front());
    for (const auto& kb : sources) {
        validate(kb);
        if (!same_schema(kb.features, setup.schema.features) || kb.classes != setup.schema.classes)
            throw DataError("source knowledge bases do not share one schema");
        for (std::size_t i = 0; i < kb.features.size(); ++i) {
            auto& f = setup.schema.features[i];
            if (f.is_numeric()) {
                f.lower = std::min(f.lower, kb.features[i].lower);
                f.upper = std::max(f.upper, kb.features[i].upper);
            }
        }
        setup.source_rule_counts.push_back(kb.rules.size());
    }
    if (!same_schema(data.features, setup.schema.features) || data.classes != setup.schema.classes)
        throw DataError("dataset schema does not match the source knowledge bases");

    const std::size_t max_rules = cfg.max_rules ? cfg.max_rules : default_max_rules(setup.source_rule_counts);
    setup.bounds = make_bounds(setup.schema, max_rules);
    return setup;
}

namespace {

IntegrationResult finish(const Population& pop, const Schema& schema, const GeneBounds& bounds,
                         std::vector<GenerationStats> history)
{
    const auto& best = pop.individuals[best_index(pop.individuals)];
    return {decode(best.genome, schema, bounds), *best.report, std::move(history)};
}

} // namespace

IntegrationResult run_integration(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                  const EvolutionConfig& cfg, const GenerationCallback& on_generation)
{
    auto setup = prepare_integration(sources, data, cfg);
    Evaluator evaluate(setup.schema, setup.bounds, data, setup.source_rule_counts, cfg.alpha);
    Rng rng(cfg.seed);

    auto pop = init_population(sources, setup.schema, setup.bounds, cfg, rng);
    evaluate_population(pop, evaluate);

    std::vector<GenerationStats> history;
    history.reserve(cfg.generations);
    for (std::size_t t = 0; t < cfg.generations; ++t) {
        nes_generation(pop, evaluate, t, cfg, rng);
        history.push_back(population_stats(pop, t + 1));
        if (on_generation)
            on_generation(history.back());
    }
    return finish(pop, setup.schema, setup.bounds, std::move(history));
}

IntegrationResult run_baseline_ga(std::span<const KnowledgeBase> sources, const LabeledDataset& data,
                                  const EvolutionConfig& cfg, const GenerationCallback& on_generation)
{
    auto setup = prepare_integration(sources, data, cfg);
    Evaluator evaluate(setup.schema, setup.bounds, data, setup.source_rule_counts, cfg.alpha);
    Rng rng(cfg.seed);

    auto pop = init_population(sources, setup.schema, setup.bounds, cfg, rng);
    evaluate_population(pop, evaluate);

    std::vector<GenerationStats> history;
    history.reserve(cfg.generations);
    for (std::size_t t = 0; t < cfg.generations; ++t) {
        pop = baseline_ga_step(pop, evaluate, cfg, rng);
        history.push_back(population_stats(pop, t + 1));
        if (on_generation)
            on_generation(history.back());
    }
    return finish(pop, setup.schema, setup.bounds, std::move(history));
}

} // namespace fki
